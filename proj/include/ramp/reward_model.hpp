#pragma once

#include "ramp/buffers.hpp"
#include "ramp/types.hpp"

#include <functional>
#include <utility>

namespace ramp {

/// Where reward-model training draws its samples from. Batches are
/// column-major (one state per column).
struct SampleSource {
  std::function<Mat(int n, Rng& rng)> positives;  // s+ ~ rho
  std::function<Mat(int n, Rng& rng)> negatives;  // s- ~ beta rho + (1 - beta) mu
  std::function<std::pair<Mat, Mat>(int n, Rng& rng)> transitions;  // (s, s') pairs
};

/// Samples backed by the present and past buffers. Transition pairs are
/// drawn uniformly from the union of both buffers.
SampleSource buffer_source(const PresentBuffer& d_rho, const PastBuffer& d_mu, double beta);

/// Stable log(1 + exp(x)).
double softplus(double x);
double sigmoid(double x);

}  // namespace ramp
