#pragma once

#include "ramp/dist.hpp"
#include "ramp/oracle.hpp"
#include "ramp/reward_kl.hpp"
#include "ramp/reward_w.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ramp::audit {

struct AuditResult {
  std::string name;
  bool passed = false;
  std::string summary;
  std::vector<std::string> counterexamples;  // first few offending instances
  double seconds = 0.0;
};

using Theorem1Fn = std::function<oracle::EntropyDecomposition(const Dist&, const Dist&, double)>;

struct AuditOptions {
  std::uint64_t seed = 7;
  Theorem1Fn theorem1 = oracle::theorem1_decomposition;
  int max_dumps = 5;
};

/// Random (rho, mu, beta) over 8 states: identity to 1e-9, residual >= 0.
AuditResult audit_theorem1(const AuditOptions& opt, int triples = 10000);
/// All deterministic policy pairs on random full-support 4-state 2-action
/// MDPs, exact and perturbed KL reward estimates.
AuditResult audit_theorem2(const AuditOptions& opt);
/// All deterministic policy pairs on a 4-state chain and on random 4-state
/// MDPs, exact and perturbed dual potentials.
AuditResult audit_theorem3(const AuditOptions& opt);
/// Simplex grid search for the maximizers of KL(rho || beta rho + (1-beta) mu).
AuditResult audit_prop1(const AuditOptions& opt);
/// Trained dual potential on chains against the min-cost-flow value.
AuditResult audit_w1(const AuditOptions& opt);
/// Trained classifier logit against the exact log-ratio.
AuditResult audit_kl_ratio(const AuditOptions& opt);

std::vector<std::string> audit_names();
/// Runs every audit, or only `only` when non-empty (throws on an unknown name).
std::vector<AuditResult> run_audits(const AuditOptions& opt, const std::string& only = "");
void print_result(std::ostream& out, const AuditResult& r);

/// Contrastive classifier trained on categorical data over n one-hot states.
struct KlRatioFit {
  Vec logit;      // trained raw logit per state
  Vec exact;      // log(rho / (beta rho + (1 - beta) mu)), -inf off supp rho
  double max_err = 0.0;  // over states with rho >= min_mass
};
struct KlRatioSchedule {
  int batch_size = 1024;
  std::vector<std::pair<int, double>> phases{{3000, 3e-3}, {2000, 3e-4}};  // (steps, lr)
  std::vector<int> hidden{64, 64};
};
KlRatioFit fit_kl_ratio(const Dist& rho, const Dist& mu, double beta, std::uint64_t seed,
                        const KlRatioSchedule& schedule = {}, double min_mass = 0.01);

/// Wasserstein potential trained on an n-state chain embedded as scalar
/// indices, constraint pairs are the chain's edges.
struct ChainDualFit {
  double oracle = 0.0;          // W1(p, beta p + (1 - beta) q)
  double estimate = 0.0;        // sum_s (p - mix)(s) f(s)
  double violation_frac = 0.0;  // edges with |f(i+1) - f(i)| > 1 + eps
  Vec potential;
};
struct ChainDualSchedule {
  int steps = 4000;
  int batch_size = 256;
  double lr = 1e-3;
  double beta = 0.1;
  std::vector<int> hidden{64, 64};
};
ChainDualFit fit_chain_dual(const Dist& p, const Dist& q, std::uint64_t seed, const ChainDualSchedule& schedule = {});

}  // namespace ramp::audit
