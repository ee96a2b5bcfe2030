#pragma once

#include "ramp/mlp.hpp"
#include "ramp/reward_model.hpp"

#include <vector>

namespace ramp {

struct WConfig {
  double beta = 7e-3;
  double eps_relax = 0.05;
  double lr_lambda = 0.03;
  double lambda0 = 30.0;
  int batch_size = 256;
  int steps_per_epoch = 500;
  double lr = 3e-4;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::relu;
};

/// Kantorovich potential trained by dual descent:
///   L(phi, lambda) = -E_rho[f] + E_mix[f] + lambda * E_pairs[max(|f(s) - f(s')| - 1, -eps)]
/// minimized in phi, with lambda <- max(0, lambda + lr_lambda * E_pairs[max(...)]).
class WRewardModel {
 public:
  WRewardModel(int state_dim, const WConfig& cfg, Rng& rng);

  double loss(const Mat& pos, const Mat& neg, const Mat& s, const Mat& s_next) const;
  /// Gradient in phi. At the hinge the slack branch (-eps) counts as inactive.
  double loss_and_grad(const Mat& pos, const Mat& neg, const Mat& s, const Mat& s_next, Vec& grad) const;

  /// E_pairs[max(|f(s) - f(s')| - 1, -eps)].
  double constraint_value(const Mat& s, const Mat& s_next) const;
  void lambda_update(const Mat& s, const Mat& s_next);

  /// steps_per_epoch rounds of lambda_update followed by one Adam step on phi.
  double train(const SampleSource& source, Rng& rng);
  double train(const SampleSource& source, Rng& rng, int steps);
  double train(const PresentBuffer& d_rho, const PastBuffer& d_mu, Rng& rng);

  double reward(const Vec& s) const { return net_.forward(s)(0); }
  Vec rewards(const Mat& states) const;

  double lambda() const { return lambda_; }
  void set_lambda(double value);
  void set_learning_rate(double lr) { opt_.lr = lr; }
  const WConfig& config() const { return cfg_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  WConfig cfg_;
  Mlp net_;
  Adam opt_;
  double lambda_;
};

}  // namespace ramp
