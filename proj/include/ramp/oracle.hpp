#pragma once

#include "ramp/dist.hpp"
#include "ramp/tabular.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ramp::oracle {

// Exact finite-state quantities used to audit the learned components.

double exact_entropy(const Dist& p);

struct KlValue {
  double value = 0.0;
  /// False when supp(p) is not contained in supp(q); value is then +inf.
  bool finite = true;
};
KlValue exact_kl(const Dist& p, const Dist& q);

/// beta * rho + (1 - beta) * mu.
Dist mixture(const Dist& rho, const Dist& mu, double beta);

/// log(rho / (beta rho + (1 - beta) mu)) per state; -inf where rho = 0.
Vec kl_log_ratio(const Dist& rho, const Dist& mu, double beta);

/// Entropy change of the past mixture after one epoch, split as
///   delta_h = lower_bound + residual,
///   lower_bound = beta (KL(rho||mu') + H(rho) - H(mu)),
///   residual = (1 - beta) KL(mu||mu'),  mu' = beta rho + (1 - beta) mu.
struct EntropyDecomposition {
  double delta_h = 0.0;
  double lower_bound = 0.0;
  double residual = 0.0;
};
EntropyDecomposition theorem1_decomposition(const Dist& rho_next, const Dist& mu_n, double beta);

/// Shortest-path (temporal) distances over a finite graph.
class MetricGraph {
 public:
  MetricGraph(int n, const std::vector<std::pair<int, int>>& edges, bool directed = false);

  static MetricGraph chain(int n);
  /// Arc s -> s' whenever some action moves s to s' with positive probability.
  static MetricGraph from_mdp(const TabularMDP& mdp);

  int size() const { return n_; }
  const std::vector<std::vector<int>>& arcs() const { return arcs_; }
  /// Steps needed to go from `from` to `to`; +inf when unreachable.
  double distance(int from, int to) const { return dist_[static_cast<std::size_t>(from) * n_ + to]; }

 private:
  int n_;
  std::vector<std::vector<int>> arcs_;  // sorted successor lists
  std::vector<double> dist_;
};

struct W1Result {
  double value = 0.0;
  /// Optimal dual potential: 1-Lipschitz along arcs and
  /// sum_s (p(s) - q(s)) potential(s) == value.
  Vec potential;
};

/// Exact Wasserstein-1 between p and q under the graph's shortest-path
/// metric, by successive shortest augmenting paths on the arc network
/// (ties broken by lowest state index).
W1Result w1_exact(const Dist& p, const Dist& q, const MetricGraph& g);

/// Quantities of the reward-improvement theorems, measured exactly.
struct TheoremWitness {
  double eps0 = 0.0;  // max_s |rho'(s)/rho(s) - 1| (inf if supp rho' exceeds supp rho)
  double eps1 = 0.0;  // sup-norm error of r_hat against the exact reward model
  double eps2 = 0.0;  // <rho', r_hat> - <rho, r_hat>
  PolicyTable pi;
  PolicyTable pi_prime;
  Vec r_hat;
};

struct ImplicationAudit {
  bool condition = false;   // hypothesis of the theorem
  bool conclusion = false;  // ordering of the divergences
  double before = 0.0;      // divergence under pi
  double after = 0.0;       // divergence under pi'
  bool holds() const { return !condition || conclusion; }
};

/// Measures eps0, eps1 (over supp rho) and eps2 for the KL reward model.
TheoremWitness measure_kl_witness(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi,
                                  const PolicyTable& pi_prime, const Vec& r_hat);
/// Condition eps2 >= 2 eps1 - log(1 - eps0) implies
/// KL(rho'||beta rho' + (1-beta) mu) >= KL(rho||beta rho + (1-beta) mu).
ImplicationAudit check_theorem2(const TheoremWitness& w, const TabularMDP& mdp, const Dist& mu, double beta);

/// Optimal dual potential of W(rho^pi, beta rho^pi + (1 - beta) mu).
Vec exact_w_potential(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi, const MetricGraph& g);
/// Measures eps1 (over all states, against exact_w_potential) and eps2.
TheoremWitness measure_w_witness(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi,
                                 const PolicyTable& pi_prime, const Vec& r_hat, const MetricGraph& g);
/// Condition eps2 >= 2 eps1 (1 + beta) implies W' >= W; when the condition
/// holds with strict margin the ordering must be strict too.
ImplicationAudit check_theorem3(const TheoremWitness& w, const TabularMDP& mdp, const Dist& mu, double beta,
                                const MetricGraph& g);

struct Prop1Result {
  bool holds = false;
  double max_value = 0.0;
  std::vector<Vec> maximizers;
  bool bound_ok = false;        // pointwise log-ratio <= log(1/beta) everywhere
  bool bound_tight_ok = false;  // equality exactly on {mu = 0}
};

/// Grid search over the simplex with step 1/resolution for the maximizers of
/// KL(rho || beta rho + (1 - beta) mu). Throws if mu has full support.
Prop1Result prop1_check(const Dist& mu, double beta, int resolution = 200);

/// KL(rho^pi || beta rho^pi + (1-beta) mu) + lambda_a E_{s~rho}[H(pi(.|s))].
double ramp_kl_objective(const TabularMDP& mdp, const PolicyTable& pi, const Dist& mu, double beta, double lambda_a);

/// Expected fraction of past-buffer slots carrying each epoch tag 0..n after
/// n epochs of `steps_per_epoch` accept-reject updates on M slots.
std::vector<double> past_tag_weights(double beta, std::size_t slots, std::size_t steps_per_epoch, int n_epochs);

}  // namespace ramp::oracle
