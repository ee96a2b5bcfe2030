#include "ramp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace ramp::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCapEps = 1e-14;

void require_same_size(const Dist& a, const Dist& b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": distributions differ in size");
}

void require_beta(double beta, bool open) {
  const bool ok = open ? (beta > 0.0 && beta < 1.0) : (beta >= 0.0 && beta <= 1.0);
  if (!ok) throw std::invalid_argument("beta out of range");
}

double inner(const Dist& p, const Vec& f) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s)
    if (p[s] > 0.0) total += p[s] * f(s);
  return total;
}

// Residual network for min-cost flow.
struct FlowArc {
  int to;
  int rev;
  double cap;
  double cost;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add(int from, int to, double cap, double cost) {
    adj_[from].push_back({to, static_cast<int>(adj_[to].size()), cap, cost});
    adj_[to].push_back({from, static_cast<int>(adj_[from].size()) - 1, 0.0, -cost});
  }

  // Bellman-Ford from a source set; nodes relaxed in index order and only on
  // strict improvement, so ties resolve to the lowest-index predecessor.
  std::vector<double> shortest(const std::vector<int>& sources, int limit, std::vector<std::pair<int, int>>* prev) const {
    std::vector<double> dist(adj_.size(), kInf);
    for (int s : sources) dist[s] = 0.0;
    if (prev) prev->assign(adj_.size(), {-1, -1});
    for (std::size_t round = 0; round < adj_.size(); ++round) {
      bool changed = false;
      for (int u = 0; u < limit; ++u) {
        if (dist[u] == kInf) continue;
        for (int e = 0; e < static_cast<int>(adj_[u].size()); ++e) {
          const FlowArc& arc = adj_[u][e];
          if (arc.to >= limit || arc.cap <= kCapEps) continue;
          if (dist[u] + arc.cost < dist[arc.to]) {
            dist[arc.to] = dist[u] + arc.cost;
            if (prev) (*prev)[arc.to] = {u, e};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    return dist;
  }

  std::vector<std::vector<FlowArc>>& adj() { return adj_; }

 private:
  std::vector<std::vector<FlowArc>> adj_;
};

}  // namespace

double exact_entropy(const Dist& p) {
  double h = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s)
    if (p[s] > 0.0) h -= p[s] * std::log(p[s]);
  return h;
}

KlValue exact_kl(const Dist& p, const Dist& q) {
  require_same_size(p, q, "exact_kl");
  double total = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    if (p[s] == 0.0) continue;
    if (q[s] == 0.0) return {kInf, false};
    total += p[s] * std::log(p[s] / q[s]);
  }
  return {std::max(total, 0.0), true};
}

Dist mixture(const Dist& rho, const Dist& mu, double beta) {
  require_same_size(rho, mu, "mixture");
  require_beta(beta, false);
  return Dist(beta * rho.probs() + (1.0 - beta) * mu.probs(), 1e-10);
}

Vec kl_log_ratio(const Dist& rho, const Dist& mu, double beta) {
  require_same_size(rho, mu, "kl_log_ratio");
  require_beta(beta, true);
  Vec r(rho.size());
  for (Eigen::Index s = 0; s < rho.size(); ++s)
    r(s) = rho[s] > 0.0 ? std::log(rho[s] / (beta * rho[s] + (1.0 - beta) * mu[s])) : -kInf;
  return r;
}

EntropyDecomposition theorem1_decomposition(const Dist& rho_next, const Dist& mu_n, double beta) {
  require_beta(beta, true);
  const Dist mu_next = mixture(rho_next, mu_n, beta);
  EntropyDecomposition d;
  const double h_mu = exact_entropy(mu_n);
  d.delta_h = exact_entropy(mu_next) - h_mu;
  d.lower_bound = beta * (exact_kl(rho_next, mu_next).value + exact_entropy(rho_next) - h_mu);
  d.residual = (1.0 - beta) * exact_kl(mu_n, mu_next).value;
  return d;
}

MetricGraph::MetricGraph(int n, const std::vector<std::pair<int, int>>& edges, bool directed)
    : n_(n), arcs_(static_cast<std::size_t>(n)) {
  if (n < 1) throw std::invalid_argument("MetricGraph: empty graph");
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("MetricGraph: edge endpoint out of range");
    if (u == v) continue;
    arcs_[u].push_back(v);
    if (!directed) arcs_[v].push_back(u);
  }
  for (auto& a : arcs_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  dist_.assign(static_cast<std::size_t>(n) * n, kInf);
  for (int src = 0; src < n; ++src) {
    std::deque<int> queue{src};
    dist_[static_cast<std::size_t>(src) * n + src] = 0.0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : arcs_[u]) {
        double& d = dist_[static_cast<std::size_t>(src) * n + v];
        if (d == kInf) {
          d = distance(src, u) + 1.0;
          queue.push_back(v);
        }
      }
    }
  }
}

MetricGraph MetricGraph::chain(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return MetricGraph(n, edges);
}

MetricGraph MetricGraph::from_mdp(const TabularMDP& mdp) {
  std::vector<std::pair<int, int>> arcs;
  for (int s = 0; s < mdp.n_states; ++s)
    for (int s2 = 0; s2 < mdp.n_states; ++s2)
      for (int a = 0; a < mdp.n_actions; ++a)
        if (s != s2 && mdp.p(s, a, s2) > 0.0) {
          arcs.emplace_back(s, s2);
          break;
        }
  return MetricGraph(mdp.n_states, arcs, true);
}

W1Result w1_exact(const Dist& p, const Dist& q, const MetricGraph& g) {
  require_same_size(p, q, "w1_exact");
  if (p.size() != g.size()) throw std::invalid_argument("w1_exact: graph size does not match distributions");
  const int n = g.size();
  const int source = n;
  const int sink = n + 1;
  FlowNetwork net(n + 2);
  double supply = 0.0;
  for (int s = 0; s < n; ++s) {
    const double b = p[s] - q[s];
    if (b > 0.0) {
      net.add(source, s, b, 0.0);
      supply += b;
    } else if (b < 0.0) {
      net.add(s, sink, -b, 0.0);
    }
  }
  for (int u = 0; u < n; ++u)
    for (int v : g.arcs()[u]) net.add(u, v, kInf, 1.0);

  double cost = 0.0;
  double pushed = 0.0;
  std::vector<std::pair<int, int>> prev;
  while (supply - pushed > kCapEps) {
    const auto dist = net.shortest({source}, n + 2, &prev);
    if (dist[sink] == kInf) throw std::invalid_argument("w1_exact: mass cannot be transported (disconnected graph)");
    double bottleneck = kInf;
    for (int v = sink; v != source; v = prev[v].first)
      bottleneck = std::min(bottleneck, net.adj()[prev[v].first][prev[v].second].cap);
    for (int v = sink; v != source; v = prev[v].first) {
      FlowArc& arc = net.adj()[prev[v].first][prev[v].second];
      arc.cap -= bottleneck;
      net.adj()[arc.to][arc.rev].cap += bottleneck;
    }
    cost += bottleneck * dist[sink];
    pushed += bottleneck;
  }

  // Dual potentials from the optimal residual network restricted to states.
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) all[s] = s;
  const auto dist = net.shortest(all, n, nullptr);
  W1Result out;
  out.value = std::max(cost, 0.0);
  out.potential = Vec(n);
  for (int s = 0; s < n; ++s) out.potential(s) = -dist[s];
  return out;
}

TheoremWitness measure_kl_witness(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi,
                                  const PolicyTable& pi_prime, const Vec& r_hat) {
  const Dist rho = exact_occupancy(mdp, pi);
  const Dist rho_p = exact_occupancy(mdp, pi_prime);
  const Vec r = kl_log_ratio(rho, mu, beta);
  TheoremWitness w;
  w.pi = pi;
  w.pi_prime = pi_prime;
  w.r_hat = r_hat;
  for (Eigen::Index s = 0; s < rho.size(); ++s) {
    if (rho[s] > 0.0) {
      w.eps0 = std::max(w.eps0, std::abs(rho_p[s] / rho[s] - 1.0));
      w.eps1 = std::max(w.eps1, std::abs(r_hat(s) - r(s)));
    } else if (rho_p[s] > 0.0) {
      w.eps0 = kInf;
    }
  }
  w.eps2 = inner(rho_p, r_hat) - inner(rho, r_hat);
  return w;
}

ImplicationAudit check_theorem2(const TheoremWitness& w, const TabularMDP& mdp, const Dist& mu, double beta) {
  const Dist rho = exact_occupancy(mdp, w.pi);
  const Dist rho_p = exact_occupancy(mdp, w.pi_prime);
  ImplicationAudit audit;
  audit.before = exact_kl(rho, mixture(rho, mu, beta)).value;
  audit.after = exact_kl(rho_p, mixture(rho_p, mu, beta)).value;
  audit.condition = w.eps0 < 1.0 && w.eps2 >= 2.0 * w.eps1 - std::log1p(-w.eps0) - 1e-12;
  audit.conclusion = audit.after >= audit.before - 1e-10;
  return audit;
}

Vec exact_w_potential(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi, const MetricGraph& g) {
  const Dist rho = exact_occupancy(mdp, pi);
  return w1_exact(rho, mixture(rho, mu, beta), g).potential;
}

TheoremWitness measure_w_witness(const TabularMDP& mdp, const Dist& mu, double beta, const PolicyTable& pi,
                                 const PolicyTable& pi_prime, const Vec& r_hat, const MetricGraph& g) {
  const Dist rho = exact_occupancy(mdp, pi);
  const Dist rho_p = exact_occupancy(mdp, pi_prime);
  const Vec r_star = exact_w_potential(mdp, mu, beta, pi, g);
  TheoremWitness w;
  w.pi = pi;
  w.pi_prime = pi_prime;
  w.r_hat = r_hat;
  w.eps1 = (r_hat - r_star).cwiseAbs().maxCoeff();
  w.eps2 = inner(rho_p, r_hat) - inner(rho, r_hat);
  for (Eigen::Index s = 0; s < rho.size(); ++s) {
    if (rho[s] > 0.0)
      w.eps0 = std::max(w.eps0, std::abs(rho_p[s] / rho[s] - 1.0));
    else if (rho_p[s] > 0.0)
      w.eps0 = kInf;
  }
  return w;
}

ImplicationAudit check_theorem3(const TheoremWitness& w, const TabularMDP& mdp, const Dist& mu, double beta,
                                const MetricGraph& g) {
  const Dist rho = exact_occupancy(mdp, w.pi);
  const Dist rho_p = exact_occupancy(mdp, w.pi_prime);
  ImplicationAudit audit;
  audit.before = w1_exact(rho, mixture(rho, mu, beta), g).value;
  audit.after = w1_exact(rho_p, mixture(rho_p, mu, beta), g).value;
  const double margin = w.eps2 - 2.0 * w.eps1 * (1.0 + beta);
  audit.condition = margin >= -1e-12;
  if (margin > 1e-9)
    audit.conclusion = audit.after > audit.before;
  else
    audit.conclusion = audit.after >= audit.before - 1e-10;
  return audit;
}

Prop1Result prop1_check(const Dist& mu, double beta, int resolution) {
  require_beta(beta, true);
  const int n = static_cast<int>(mu.size());
  if ((mu.probs().array() > 0.0).all())
    throw std::invalid_argument("prop1_check: mu must vanish on at least one state");
  if (resolution < 1) throw std::invalid_argument("prop1_check: resolution must be >= 1");
  const double bound = std::log(1.0 / beta);

  Prop1Result out;
  out.bound_ok = true;
  out.bound_tight_ok = true;
  out.max_value = -kInf;
  std::vector<std::pair<double, Vec>> values;
  std::vector<int> parts(static_cast<std::size_t>(n), 0);

  // Enumerate all compositions of `resolution` into n nonnegative parts.
  auto visit = [&](const std::vector<int>& c) {
    Vec rho(n);
    for (int s = 0; s < n; ++s) rho(s) = static_cast<double>(c[s]) / resolution;
    double kl = 0.0;
    for (int s = 0; s < n; ++s) {
      if (c[s] == 0) continue;
      const double denom = beta * rho(s) + (1.0 - beta) * mu[s];
      const double lr = std::log(rho(s) / denom);
      kl += rho(s) * lr;
      if (lr > bound + 1e-12) out.bound_ok = false;
      if (mu[s] == 0.0) {
        if (std::abs(lr - bound) > 1e-12) out.bound_tight_ok = false;
      } else if (!(rho(s) / denom < 1.0 / beta)) {
        out.bound_tight_ok = false;
      }
    }
    out.max_value = std::max(out.max_value, kl);
    values.emplace_back(kl, std::move(rho));
  };
  std::vector<int> c(static_cast<std::size_t>(n), 0);
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      c[pos] = remaining;
      visit(c);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      c[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  recurse(recurse, 0, resolution);

  bool supported = true;
  for (auto& [value, rho] : values) {
    if (value < out.max_value - 1e-12) continue;
    for (int s = 0; s < n; ++s)
      if (rho(s) > 0.0 && mu[s] > 0.0) supported = false;
    out.maximizers.push_back(std::move(rho));
  }
  out.holds = supported && std::abs(out.max_value - bound) <= 1e-12 && out.bound_ok && out.bound_tight_ok;
  return out;
}

double ramp_kl_objective(const TabularMDP& mdp, const PolicyTable& pi, const Dist& mu, double beta, double lambda_a) {
  const Dist rho = exact_occupancy(mdp, pi);
  double policy_entropy = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    double h = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a)
      if (pi(s, a) > 0.0) h -= pi(s, a) * std::log(pi(s, a));
    policy_entropy += rho[s] * h;
  }
  return exact_kl(rho, mixture(rho, mu, beta)).value + lambda_a * policy_entropy;
}

std::vector<double> past_tag_weights(double beta, std::size_t slots, std::size_t steps_per_epoch, int n_epochs) {
  if (slots == 0 || n_epochs < 0) throw std::invalid_argument("past_tag_weights: bad arguments");
  const double survive = std::pow(1.0 - beta / static_cast<double>(slots), static_cast<double>(steps_per_epoch));
  std::vector<double> w(static_cast<std::size_t>(n_epochs) + 1);
  w[0] = std::pow(survive, n_epochs);
  for (int k = 1; k <= n_epochs; ++k) w[k] = (1.0 - survive) * std::pow(survive, n_epochs - k);
  return w;
}

}  // namespace ramp::oracle
