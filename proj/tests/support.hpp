#pragma once

#include "ramp/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ramp::test {

struct GradCheck {
  double worst_excess = 0.0;  // max over coordinates of |a - n| - tolerance
  Eigen::Index worst = -1;
  bool ok = true;
};

/// Central differences with step h against an analytic gradient. A
/// coordinate passes when |a - n| <= rel * max(|a|, |n|) + abs.
inline GradCheck check_gradient(Vec& params, const Vec& analytic, const std::function<double()>& loss,
                                double h = 1e-5, double rel = 1e-4, double abs = 1e-8) {
  GradCheck out;
  out.worst_excess = -INFINITY;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params(i);
    params(i) = keep + h;
    const double up = loss();
    params(i) = keep - h;
    const double down = loss();
    params(i) = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double excess =
        std::abs(analytic(i) - numeric) - (rel * std::max(std::abs(analytic(i)), std::abs(numeric)) + abs);
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.worst = i;
    }
    if (excess > 0.0) out.ok = false;
  }
  return out;
}

inline Mat uniform_mat(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline Vec random_simplex(int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec p(n);
  for (int i = 0; i < n; ++i) p(i) = e(rng);
  return p / p.sum();
}

}  // namespace ramp::test
