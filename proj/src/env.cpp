#include "ramp/env.hpp"

#include "ramp/dist.hpp"

#include <cmath>
#include <stdexcept>

namespace ramp {

Dist::Dist(Vec p, double tol) : p_(std::move(p)) {
  if (p_.size() == 0) throw std::invalid_argument("Dist: empty probability vector");
  for (Eigen::Index i = 0; i < p_.size(); ++i)
    if (!(p_(i) >= 0.0) || !std::isfinite(p_(i))) throw std::invalid_argument("Dist: negative or non-finite entry");
  if (std::abs(p_.sum() - 1.0) > tol) throw std::invalid_argument("Dist: entries do not sum to 1");
}

Dist Dist::uniform(int n) { return Dist(Vec::Constant(n, 1.0 / n), 1e-9); }

Dist Dist::dirac(int n, int at) {
  Vec p = Vec::Zero(n);
  p(at) = 1.0;
  return Dist(std::move(p));
}

std::vector<Transition> rollout(const Env& env, const Policy& policy, Rng& rng) {
  std::vector<Transition> episode;
  episode.reserve(static_cast<std::size_t>(env.horizon()));
  Vec s = env.reset(rng);
  for (int t = 1; t <= env.horizon(); ++t) {
    Vec a = policy(s, rng);
    StepResult step = env.step(s, a, rng);
    episode.push_back({s, std::move(a), step.s_next, step.r_ext, t == env.horizon()});
    s = std::move(step.s_next);
  }
  return episode;
}

Policy random_policy(const Env& env) {
  return [&env](const Vec&, Rng& rng) { return env.random_action(rng); };
}

}  // namespace ramp
