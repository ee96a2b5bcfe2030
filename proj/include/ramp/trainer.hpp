#pragma once

#include "ramp/buffers.hpp"
#include "ramp/config.hpp"
#include "ramp/env.hpp"
#include "ramp/maze.hpp"
#include "ramp/metrics.hpp"
#include "ramp/reward_kl.hpp"
#include "ramp/reward_w.hpp"
#include "ramp/sac.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ramp {

/// max(0, 1 - 2t / total): full weight at the start, zero from halfway on.
double intrinsic_weight(std::int64_t t, std::int64_t total);
/// r_ext + w * alpha * r_int.
double mix_reward(double r_ext, double r_int, double w, double alpha);

struct EpochLog {
  int epoch = 0;
  std::int64_t env_steps = 0;
  double coverage_pct = 0.0;
  double entropy_est = 0.0;
  double mean_r_int = 0.0;
  double rm_loss = 0.0;
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double actor_loss = 0.0;
  double lambda = 0.0;
  double wall_s = 0.0;
};

std::string epoch_csv_header();
std::string epoch_csv_row(const EpochLog& log);

/// State of one RAMP run: environment, present and past buffers, reward
/// model, policy optimizer, coverage grid and the random streams.
class Trainer {
 public:
  explicit Trainer(const RampConfig& cfg);
  /// Arbitrary environment; coverage and entropy use `grid` on the leading
  /// grid.lo.size() state coordinates.
  Trainer(const RampConfig& cfg, std::shared_ptr<const Env> env, GridSpec grid);

  /// One epoch: collect episodes_per_epoch episodes into the reset present
  /// buffer, retrain the reward model, run SAC on relabeled replay, then
  /// offer every new transition to the past buffer.
  EpochLog run_epoch();

  /// Reward model output at a landing state (clamped logit or potential).
  double intrinsic(const Vec& s_next) const;
  /// Reward the critics see for a replay row right now.
  double relabel(const Transition& t) const;

  std::size_t replay_size() const { return present_.size() + past_.size(); }
  const Transition& replay_item(std::size_t i) const;
  /// Uniform minibatch over D_rho and D_mu with relabeled rewards. Row
  /// indices into the replay are reported through `rows` when non-null.
  SacBatch sample_batch(int batch_size, Rng& rng, std::vector<std::size_t>* rows = nullptr) const;

  /// Mean undiscounted extrinsic return of deterministic-actor episodes.
  double evaluate(int episodes) const;

  void write_scatter(std::ostream& out, int max_points) const;
  void save_checkpoint(const std::string& dir) const;

  const RampConfig& config() const { return cfg_; }
  const Env& env() const { return *env_; }
  int epoch() const { return epoch_; }
  std::int64_t env_steps() const { return env_steps_; }
  const PresentBuffer& present() const { return present_; }
  const PastBuffer& past() const { return past_; }
  const CoverageGrid& coverage() const { return coverage_; }
  SacAgent& agent() { return agent_; }
  const SacAgent& agent() const { return agent_; }
  KlRewardModel* kl_model() { return kl_ ? &*kl_ : nullptr; }
  WRewardModel* w_model() { return w_ ? &*w_ : nullptr; }
  double reward_mean() const { return r_mean_; }
  double reward_scale() const { return r_scale_; }

 private:
  Vec project(const Vec& s) const;
  Vec raw_rewards(const Mat& states) const;
  void refresh_normalization();

  RampConfig cfg_;
  std::shared_ptr<const Env> env_;
  GridSpec grid_;
  Rng env_rng_;
  Rng reward_rng_;
  Rng sac_rng_;
  Rng buffer_rng_;
  PresentBuffer present_;
  PastBuffer past_;
  SacAgent agent_;
  std::optional<KlRewardModel> kl_;
  std::optional<WRewardModel> w_;
  CoverageGrid coverage_;
  int epoch_ = 0;
  std::int64_t env_steps_ = 0;
  double r_mean_ = 0.0;
  double r_scale_ = 1.0;
};

struct RunOptions {
  std::string out_dir;  // empty: nothing written
  std::function<void(const EpochLog&, double wall_s)> on_epoch;
};

/// Executes N + 1 epochs. With an output directory it writes
/// config.snapshot, epochs.csv (flushed per epoch), eval.csv, scatter and
/// buffer files and checkpoints.
std::vector<EpochLog> run_training(const RampConfig& cfg, const RunOptions& opts = {});

}  // namespace ramp
