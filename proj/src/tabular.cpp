#include "ramp/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace ramp {

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("TabularMDP: empty state or action set");
  if (horizon < 1) throw std::invalid_argument("TabularMDP: horizon must be >= 1");
  if (transition.size() != static_cast<std::size_t>(n_states) * n_actions * n_states)
    throw std::invalid_argument("TabularMDP: transition tensor has the wrong size");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        if (!(p(s, a, s2) >= 0.0)) throw std::invalid_argument("TabularMDP: negative transition probability");
        sum += p(s, a, s2);
      }
      if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("TabularMDP: P[s,a,.] does not sum to 1");
    }
  }
  Dist check(delta0);
}

TabularMDP TabularMDP::chain(int n, int horizon, double slip, int start) {
  TabularMDP m;
  m.n_states = n;
  m.n_actions = 2;
  m.horizon = horizon;
  m.transition.assign(static_cast<std::size_t>(n) * 2 * n, 0.0);
  for (int s = 0; s < n; ++s) {
    const int left = std::max(s - 1, 0);
    const int right = std::min(s + 1, n - 1);
    m.p(s, 0, left) += 1.0 - slip;
    m.p(s, 0, right) += slip;
    m.p(s, 1, right) += 1.0 - slip;
    m.p(s, 1, left) += slip;
  }
  m.delta0 = Vec::Zero(n);
  m.delta0(start) = 1.0;
  m.validate();
  return m;
}

TabularMDP TabularMDP::random(int n_states, int n_actions, int horizon, Rng& rng) {
  TabularMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.horizon = horizon;
  m.transition.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) sum += (m.p(s, a, s2) = u(rng));
      for (int s2 = 0; s2 < n_states; ++s2) m.p(s, a, s2) /= sum;
      // Renormalizing leaves rounding residue; fold it into the last entry.
      double total = 0.0;
      for (int s2 = 0; s2 + 1 < n_states; ++s2) total += m.p(s, a, s2);
      m.p(s, a, n_states - 1) = 1.0 - total;
    }
  }
  m.delta0 = Vec(n_states);
  for (int s = 0; s < n_states; ++s) m.delta0(s) = u(rng);
  m.delta0 /= m.delta0.sum();
  m.validate();
  return m;
}

std::vector<PolicyTable> enumerate_deterministic_policies(int n_states, int n_actions) {
  std::vector<PolicyTable> out;
  std::vector<int> choice(static_cast<std::size_t>(n_states), 0);
  while (true) {
    PolicyTable pi = PolicyTable::Zero(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) pi(s, choice[s]) = 1.0;
    out.push_back(std::move(pi));
    int pos = n_states - 1;
    while (pos >= 0 && ++choice[pos] == n_actions) choice[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

Dist exact_occupancy(const TabularMDP& mdp, const PolicyTable& policy) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions)
    throw std::invalid_argument("exact_occupancy: policy table has the wrong shape");
  for (int s = 0; s < mdp.n_states; ++s) {
    if ((policy.row(s).array() < 0.0).any() || std::abs(policy.row(s).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("exact_occupancy: policy row " + std::to_string(s) + " is not a distribution");
  }
  // State-to-state kernel under the policy.
  Mat kernel = Mat::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a)
      for (int s2 = 0; s2 < mdp.n_states; ++s2) kernel(s, s2) += policy(s, a) * mdp.p(s, a, s2);

  Vec d = mdp.delta0;
  Vec acc = Vec::Zero(mdp.n_states);
  for (int t = 1; t <= mdp.horizon; ++t) {
    acc += d;
    d = kernel.transpose() * d;
  }
  acc /= mdp.horizon;
  acc /= acc.sum();
  return Dist(std::move(acc), 1e-10);
}

TabularEnv::TabularEnv(TabularMDP mdp) : mdp_(std::move(mdp)) { mdp_.validate(); }

namespace {
int draw(const auto& weights, int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  for (int i = 0; i < n - 1; ++i) {
    x -= weights(i);
    if (x < 0.0) return i;
  }
  return n - 1;
}
}  // namespace

Vec TabularEnv::reset(Rng& rng) const { return Vec::Constant(1, draw(mdp_.delta0, mdp_.n_states, rng)); }

StepResult TabularEnv::step(const Vec& s, const Vec& a, Rng& rng) const {
  const int si = static_cast<int>(s(0));
  const int ai = static_cast<int>(a(0));
  if (si < 0 || si >= mdp_.n_states || ai < 0 || ai >= mdp_.n_actions)
    throw std::invalid_argument("TabularEnv::step: index out of range");
  Eigen::Map<const Vec> row(&mdp_.transition[(static_cast<std::size_t>(si) * mdp_.n_actions + ai) * mdp_.n_states],
                            mdp_.n_states);
  return {Vec::Constant(1, draw(row, mdp_.n_states, rng)), 0.0};
}

Vec TabularEnv::random_action(Rng& rng) const {
  std::uniform_int_distribution<int> u(0, mdp_.n_actions - 1);
  return Vec::Constant(1, u(rng));
}

Policy TabularEnv::table_policy(const PolicyTable& table) const {
  return [table, n = mdp_.n_actions](const Vec& s, Rng& rng) {
    const auto row = table.row(static_cast<int>(s(0))).transpose();
    return Vec::Constant(1, draw(row, n, rng));
  };
}

}  // namespace ramp
