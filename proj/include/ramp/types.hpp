#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace ramp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One engine type everywhere so that a (config, seed) pair pins every draw.
using Rng = std::mt19937_64;

}  // namespace ramp
