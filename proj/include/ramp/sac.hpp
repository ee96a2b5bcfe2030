#pragma once

#include "ramp/mlp.hpp"

#include <utility>
#include <vector>

namespace ramp {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lambda_a = 0.1;  // entropy weight, fixed
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  int batch_size = 256;
  double updates_per_env_step = 1.0;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::relu;

  void validate() const;

  friend bool operator==(const SacConfig&, const SacConfig&) = default;
};

/// Rows of a replay minibatch, column-major.
struct SacBatch {
  Mat s;
  Mat a;
  Vec r;
  Mat s_next;
  Vec done;
};

/// Actions drawn by the reparameterized tanh-Gaussian policy.
struct PolicySample {
  Mat action;    // tanh(u), strictly inside (-1, 1)
  Vec log_prob;  // log pi(a|s), including the tanh correction
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Log-density of a = tanh(mean + exp(log_std) * noise), per dimension summed.
double squashed_gaussian_log_prob(double mean, double log_std, double noise);

/// Soft actor-critic with twin critics, target critics and a fixed
/// entropy weight. The actor outputs (mean, log_std) per action dimension.
class SacAgent {
 public:
  SacAgent(int state_dim, int action_dim, const SacConfig& cfg, Rng& rng);

  Vec act(const Vec& s, bool deterministic, Rng& rng) const;

  /// Reparameterized actions for a batch given standard-normal noise
  /// (action_dim x batch).
  PolicySample sample(const Mat& states, const Mat& noise) const;

  /// y = r + gamma (1 - done) (min(Q1', Q2')(s', a') - lambda_a log pi(a'|s')).
  Vec critic_targets(const SacBatch& batch, const Mat& next_noise) const;

  /// Mean squared error of critic `which` (0 or 1) against targets y.
  double critic_loss(int which, const Mat& s, const Mat& a, const Vec& y, Vec* grad = nullptr) const;
  /// mean(lambda_a log pi(a|s) - min(Q1, Q2)(s, a)), a reparameterized from noise.
  double actor_loss(const Mat& states, const Mat& noise, Vec* grad = nullptr) const;

  /// One Adam step on each critic. Returns the two losses.
  std::pair<double, double> critic_update(const SacBatch& batch, Rng& rng);
  double actor_update(const Mat& states, Rng& rng);
  /// target <- tau * online + (1 - tau) * target, both critics.
  void target_soft_update();

  Mat standard_noise(Eigen::Index batch, Rng& rng) const;

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const SacConfig& config() const { return cfg_; }
  SacConfig& config() { return cfg_; }

  Mlp actor;
  Mlp q1;
  Mlp q2;
  Mlp q1_target;
  Mlp q2_target;

 private:
  int state_dim_;
  int action_dim_;
  SacConfig cfg_;
  Adam actor_opt_;
  Adam q1_opt_;
  Adam q2_opt_;
};

}  // namespace ramp
