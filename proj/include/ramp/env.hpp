#pragma once

#include "ramp/types.hpp"

#include <functional>
#include <vector>

namespace ramp {

struct Transition {
  Vec s;
  Vec a;
  Vec s_next;
  double r_ext = 0.0;
  bool done = false;  // set on the last step of an episode (t = T)
};

struct StepResult {
  Vec s_next;
  double r_ext = 0.0;
};

/// Reward-free episodic environment with a fixed horizon. Implementations
/// are immutable after construction; step() is pure given its arguments.
class Env {
 public:
  virtual ~Env() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual Vec reset(Rng& rng) const = 0;
  virtual StepResult step(const Vec& s, const Vec& a, Rng& rng) const = 0;
  virtual Vec random_action(Rng& rng) const = 0;
};

using Policy = std::function<Vec(const Vec& state, Rng& rng)>;

/// Runs one full-horizon episode and returns its T transitions.
std::vector<Transition> rollout(const Env& env, const Policy& policy, Rng& rng);

/// The uniform random policy of an environment.
Policy random_policy(const Env& env);

}  // namespace ramp
