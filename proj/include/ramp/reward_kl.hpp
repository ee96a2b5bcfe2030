#pragma once

#include "ramp/mlp.hpp"
#include "ramp/reward_model.hpp"

#include <vector>

namespace ramp {

struct KlConfig {
  double beta = 7e-3;
  int batch_size = 256;
  int steps_per_epoch = 500;
  double lr = 3e-4;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::relu;
};

/// Contrastive classifier whose logit estimates
/// log(rho / (beta rho + (1 - beta) mu)).
class KlRewardModel {
 public:
  KlRewardModel(int state_dim, const KlConfig& cfg, Rng& rng);

  /// -mean log sigma(f(s+)) - mean log(1 - sigma(f(s-))), balanced batches.
  double loss(const Mat& pos, const Mat& neg) const;
  double loss_and_grad(const Mat& pos, const Mat& neg, Vec& grad) const;

  /// steps_per_epoch Adam steps on the loss. Returns the mean batch loss
  /// (0 when no steps were run).
  double train(const SampleSource& source, Rng& rng);
  double train(const SampleSource& source, Rng& rng, int steps);
  double train(const PresentBuffer& d_rho, const PastBuffer& d_mu, Rng& rng);

  double logit(const Vec& s) const { return net_.forward(s)(0); }
  /// The logit clamped to [clamp_low, clamp_high].
  double reward(const Vec& s) const;
  Vec rewards(const Mat& states) const;

  double clamp_low() const { return clamp_low_; }
  double clamp_high() const { return clamp_high_; }
  void set_learning_rate(double lr) { opt_.lr = lr; }
  const KlConfig& config() const { return cfg_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  KlConfig cfg_;
  Mlp net_;
  Adam opt_;
  double clamp_low_;
  double clamp_high_;
};

}  // namespace ramp
