#pragma once

#include "ramp/types.hpp"

#include <initializer_list>

namespace ramp {

/// Probability vector over a finite state set.
class Dist {
 public:
  Dist() = default;
  /// Throws std::invalid_argument unless p is nonnegative and sums to 1 within tol.
  explicit Dist(Vec p, double tol = 1e-12);
  Dist(std::initializer_list<double> p) : Dist(Vec(Eigen::Map<const Vec>(p.begin(), static_cast<Eigen::Index>(p.size())))) {}

  static Dist uniform(int n);
  static Dist dirac(int n, int at);

  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_(i); }
  const Vec& probs() const { return p_; }

 private:
  Vec p_;
};

}  // namespace ramp
