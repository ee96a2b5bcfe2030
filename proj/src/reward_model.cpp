#include "ramp/reward_model.hpp"

#include <cmath>

namespace ramp {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

SampleSource buffer_source(const PresentBuffer& d_rho, const PastBuffer& d_mu, double beta) {
  const Eigen::Index dim = d_mu[0].s.size();
  SampleSource src;
  src.positives = [&d_rho, dim](int n, Rng& rng) {
    Mat out(dim, n);
    for (int i = 0; i < n; ++i) out.col(i) = d_rho.sample(rng).s;
    return out;
  };
  src.negatives = [&d_rho, &d_mu, beta, dim](int n, Rng& rng) {
    Mat out(dim, n);
    for (int i = 0; i < n; ++i) out.col(i) = sample_negative(d_rho, d_mu, beta, rng).s;
    return out;
  };
  src.transitions = [&d_rho, &d_mu, dim](int n, Rng& rng) {
    Mat s(dim, n);
    Mat s_next(dim, n);
    std::uniform_int_distribution<std::size_t> pick(0, d_rho.size() + d_mu.size() - 1);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = pick(rng);
      const Transition& t = k < d_rho.size() ? d_rho[k] : d_mu[k - d_rho.size()];
      s.col(i) = t.s;
      s_next.col(i) = t.s_next;
    }
    return std::make_pair(std::move(s), std::move(s_next));
  };
  return src;
}

}  // namespace ramp
