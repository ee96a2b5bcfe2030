#pragma once

#include "ramp/dist.hpp"
#include "ramp/env.hpp"

#include <vector>

namespace ramp {

/// Finite reward-free MDP (S, A, P, delta0) with horizon T.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'] row-major
  Vec delta0;
  int horizon = 1;

  double p(int s, int a, int s_next) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s_next];
  }
  double& p(int s, int a, int s_next) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s_next];
  }

  void validate() const;

  /// n-state chain; action 0 moves left, action 1 moves right. With
  /// probability slip the opposite move happens. Ends reflect.
  static TabularMDP chain(int n, int horizon, double slip = 0.0, int start = 0);
  /// Dense random transitions and initial distribution with full support.
  static TabularMDP random(int n_states, int n_actions, int horizon, Rng& rng);
};

/// Rows are states, columns actions; each row a distribution.
using PolicyTable = Mat;

/// All n_actions^n_states deterministic policies, in lexicographic order.
std::vector<PolicyTable> enumerate_deterministic_policies(int n_states, int n_actions);

/// rho(s) = E[(1/T) sum_{t=1..T} 1{s_t = s}], by forward propagation.
Dist exact_occupancy(const TabularMDP& mdp, const PolicyTable& policy);

/// Environment view of a TabularMDP: states and actions are 1-d vectors
/// holding an index.
class TabularEnv final : public Env {
 public:
  explicit TabularEnv(TabularMDP mdp);
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return mdp_.horizon; }
  Vec reset(Rng& rng) const override;
  StepResult step(const Vec& s, const Vec& a, Rng& rng) const override;
  Vec random_action(Rng& rng) const override;

  const TabularMDP& mdp() const { return mdp_; }
  /// Policy drawing actions from a policy table.
  Policy table_policy(const PolicyTable& table) const;

 private:
  TabularMDP mdp_;
};

}  // namespace ramp
