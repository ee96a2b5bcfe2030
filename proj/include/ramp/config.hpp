#pragma once

#include "ramp/reward_kl.hpp"
#include "ramp/reward_w.hpp"
#include "ramp/sac.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace ramp {

enum class Variant { kl, w };

std::string to_string(Variant v);
std::string to_string(Activation a);

struct EnvConfig {
  std::string maze = "u";  // "easy", "u", "hard" or a maze file path
  double dt = 0.01;
  int horizon = 200;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct BufferConfig {
  double beta = 7e-3;
  std::int64_t past_size = 100000;
  int episodes_per_epoch = 10;

  friend bool operator==(const BufferConfig&, const BufferConfig&) = default;
};

struct RewardConfig {
  int batch_size = 256;
  int steps_per_epoch = 500;
  double lr = 3e-4;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::relu;
  double eps_relax = 0.05;
  double lr_lambda = 0.03;
  double lambda0 = 30.0;
  /// Per-epoch z-normalization of intrinsic rewards. Unset means on for W,
  /// off for KL; parsing always resolves it.
  std::optional<bool> normalize;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct TrainerConfig {
  int n_epochs = 99;                 // N; the run executes N + 1 epochs
  std::int64_t total_env_steps = 0;  // 0: (N + 1) * episodes_per_epoch * horizon
  double alpha = 1.0;                // intrinsic scale; 0 gives plain SAC
  bool extrinsic = false;
  int eval_interval = 10;
  int eval_episodes = 1;
  int checkpoint_interval = 0;  // 0 disables intermediate checkpoints
  int scatter_interval = 10;    // 0 disables scatter files
  int scatter_points = 2000;
  int coverage_resolution = 50;
  bool log_wall_clock = false;

  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

struct RampConfig {
  Variant variant = Variant::w;
  std::uint64_t seed = 0;
  EnvConfig env;
  BufferConfig buffers;
  RewardConfig reward;
  SacConfig sac;
  TrainerConfig trainer;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  bool normalize_intrinsic() const;
  std::int64_t steps_per_epoch() const;
  std::int64_t total_steps() const;

  KlConfig kl_config() const;
  WConfig w_config() const;

  friend bool operator==(const RampConfig&, const RampConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON with sections env, buffers, reward, sac, trainer plus top-level
/// variant and seed. Missing keys take defaults; unknown keys are errors.
RampConfig parse_config(const std::string& text, const std::string& origin = "config");
RampConfig load_config(const std::string& path);
/// Fully resolved JSON (every field explicit), stable key order.
std::string serialize_config(const RampConfig& cfg);

}  // namespace ramp
