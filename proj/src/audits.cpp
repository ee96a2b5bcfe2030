#include "ramp/audits.hpp"

#include "ramp/tabular.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ramp::audit {

namespace {

std::string show(const Vec& v) {
  std::ostringstream os;
  os.precision(10);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ']';
  return os.str();
}

std::string show(const PolicyTable& pi) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    Eigen::Index a = 0;
    pi.row(s).maxCoeff(&a);
    os << (s ? " " : "") << a;
  }
  os << ']';
  return os.str();
}

Dist random_dist(int n, Rng& rng, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(zero_prob);
  Vec p(n);
  for (int i = 0; i < n; ++i) p(i) = zero(rng) ? 0.0 : e(rng);
  if (p.sum() == 0.0) p(std::uniform_int_distribution<int>(0, n - 1)(rng)) = 1.0;
  p /= p.sum();
  return Dist(p, 1e-10);
}

// Same direction, sup-norm exactly `size`.
Vec perturbation(int n, double size, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = u(rng);
  return d * (size / d.cwiseAbs().maxCoeff());
}

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void dump(AuditResult& r, const AuditOptions& opt, const std::string& text) {
  if (static_cast<int>(r.counterexamples.size()) < opt.max_dumps) r.counterexamples.push_back(text);
}

struct PairTally {
  long pairs = 0;
  long satisfied = 0;
  long nontrivial = 0;  // condition holds and the occupancies differ
  long violations = 0;
};

Mat one_hot_batch(const std::vector<int>& idx, int n) {
  Mat out = Mat::Zero(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  return out;
}

// Actions only tilt a shared kernel, so occupancies of different policies
// stay within a factor of two of each other more often.
TabularMDP tilted_mdp(double influence, Rng& rng) {
  const TabularMDP base = TabularMDP::random(4, 2, 8, rng);
  TabularMDP mdp = TabularMDP::random(4, 2, 8, rng);
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 2; ++a) {
      double total = 0.0;
      for (int t = 0; t < 4; ++t) total += mdp.p(s, a, t) = (1.0 - influence) * base.p(s, 0, t) + influence * mdp.p(s, a, t);
      for (int t = 0; t < 4; ++t) mdp.p(s, a, t) /= total;
    }
  mdp.validate();
  return mdp;
}

std::discrete_distribution<int> categorical(const Dist& p) {
  return std::discrete_distribution<int>(p.probs().data(), p.probs().data() + p.size());
}

}  // namespace

AuditResult audit_theorem1(const AuditOptions& opt, int triples) {
  Timer timer;
  AuditResult r;
  r.name = "theorem1";
  Rng rng(opt.seed);
  const double fixed[] = {0.1, 0.5, 0.9};
  std::uniform_real_distribution<double> ub(0.01, 0.99);
  double worst = 0.0;
  long failures = 0;
  for (int i = 0; i < triples; ++i) {
    const double zeros = (i % 4 == 3) ? 0.3 : 0.0;
    const Dist rho = random_dist(8, rng, zeros);
    const Dist mu = random_dist(8, rng, zeros);
    const double beta = (i % 4 == 3) ? ub(rng) : fixed[i % 3];
    const auto d = opt.theorem1(rho, mu, beta);
    const double gap = std::abs(d.delta_h - d.lower_bound - d.residual);
    worst = std::max(worst, gap);
    if (gap > 1e-9 || d.residual < 0.0 || d.lower_bound > d.delta_h + 1e-9) {
      ++failures;
      std::ostringstream os;
      os.precision(17);
      os << "rho=" << show(rho.probs()) << " mu=" << show(mu.probs()) << " beta=" << beta << " delta_h=" << d.delta_h
         << " lower_bound=" << d.lower_bound << " residual=" << d.residual;
      dump(r, opt, os.str());
    }
  }
  std::ostringstream os;
  os << triples << " triples, max identity gap " << std::scientific << std::setprecision(2) << worst << ", "
     << failures << " failures";
  r.summary = os.str();
  r.passed = failures == 0;
  r.seconds = timer.seconds();
  return r;
}

AuditResult audit_theorem2(const AuditOptions& opt) {
  Timer timer;
  AuditResult r;
  r.name = "theorem2";
  Rng rng(opt.seed + 2);
  const auto policies = enumerate_deterministic_policies(4, 2);
  PairTally tally;
  for (int m = 0; m < 8; ++m) {
    const TabularMDP mdp = m % 2 ? tilted_mdp(0.4, rng) : TabularMDP::random(4, 2, 8, rng);
    for (int variant = 0; variant < 3; ++variant) {
      const Dist mu = variant == 0 ? random_dist(4, rng) : random_dist(4, rng, 0.5);
      const double beta = variant == 1 ? 0.01 : 0.1;
      for (const auto& pi : policies) {
        const Vec r_exact = oracle::kl_log_ratio(exact_occupancy(mdp, pi), mu, beta);
        const Vec r_hats[] = {r_exact, r_exact + perturbation(4, 0.05, rng), r_exact + perturbation(4, 0.01, rng)};
        for (const Vec& r_hat : r_hats) {
          for (const auto& pi2 : policies) {
            const auto w = oracle::measure_kl_witness(mdp, mu, beta, pi, pi2, r_hat);
            const auto a = oracle::check_theorem2(w, mdp, mu, beta);
            ++tally.pairs;
            if (!a.condition) continue;
            ++tally.satisfied;
            if (std::abs(a.after - a.before) > 1e-12 || w.eps0 > 0.0) ++tally.nontrivial;
            if (!a.holds()) {
              ++tally.violations;
              std::ostringstream os;
              os.precision(12);
              os << "mdp#" << m << " pi=" << show(pi) << " pi'=" << show(pi2) << " eps0=" << w.eps0
                 << " eps1=" << w.eps1 << " eps2=" << w.eps2 << " KL=" << a.before << " KL'=" << a.after;
              dump(r, opt, os.str());
            }
          }
        }
      }
    }
  }
  std::ostringstream os;
  os << tally.pairs << " pairs, " << tally.satisfied << " satisfy the condition (" << tally.nontrivial
     << " with pi' != pi in occupancy), " << tally.violations << " counterexamples";
  r.summary = os.str();
  r.passed = tally.violations == 0 && tally.nontrivial > 0;
  r.seconds = timer.seconds();
  return r;
}

AuditResult audit_theorem3(const AuditOptions& opt) {
  Timer timer;
  AuditResult r;
  r.name = "theorem3";
  Rng rng(opt.seed + 3);
  const auto policies = enumerate_deterministic_policies(4, 2);
  PairTally tally;
  long strict_cases = 0;
  for (int m = 0; m < 5; ++m) {
    const TabularMDP mdp = m == 0 ? TabularMDP::chain(4, 6, 0.1) : TabularMDP::random(4, 2, 8, rng);
    const oracle::MetricGraph g = m == 0 ? oracle::MetricGraph::chain(4) : oracle::MetricGraph::from_mdp(mdp);
    for (int variant = 0; variant < 2; ++variant) {
      const Dist mu = variant == 0 ? random_dist(4, rng) : random_dist(4, rng, 0.4);
      const double beta = variant == 0 ? 0.1 : 0.5;
      for (const auto& pi : policies) {
        const Vec r_exact = oracle::exact_w_potential(mdp, mu, beta, pi, g);
        const Vec r_hats[] = {r_exact, r_exact + perturbation(4, 0.05, rng), r_exact + perturbation(4, 0.01, rng)};
        for (const Vec& r_hat : r_hats) {
          for (const auto& pi2 : policies) {
            const auto w = oracle::measure_w_witness(mdp, mu, beta, pi, pi2, r_hat, g);
            const auto a = oracle::check_theorem3(w, mdp, mu, beta, g);
            ++tally.pairs;
            if (!a.condition) continue;
            ++tally.satisfied;
            if (w.eps2 - 2.0 * w.eps1 * (1.0 + beta) > 1e-9) ++strict_cases;
            if (std::abs(a.after - a.before) > 1e-12) ++tally.nontrivial;
            if (!a.holds()) {
              ++tally.violations;
              std::ostringstream os;
              os.precision(12);
              os << (m == 0 ? "chain" : "mdp#" + std::to_string(m)) << " pi=" << show(pi) << " pi'=" << show(pi2)
                 << " eps1=" << w.eps1 << " eps2=" << w.eps2 << " W=" << a.before << " W'=" << a.after;
              dump(r, opt, os.str());
            }
          }
        }
      }
    }
  }
  std::ostringstream os;
  os << tally.pairs << " pairs, " << tally.satisfied << " satisfy the condition (" << strict_cases
     << " strictly), " << tally.violations << " counterexamples";
  r.summary = os.str();
  r.passed = tally.violations == 0 && strict_cases > 0;
  r.seconds = timer.seconds();
  return r;
}

AuditResult audit_prop1(const AuditOptions& opt) {
  Timer timer;
  AuditResult r;
  r.name = "prop1";
  Rng rng(opt.seed + 4);
  struct Case {
    Dist mu;
    double beta;
  };
  std::vector<Case> cases{{Dist{1.0, 0.0}, 0.5}, {Dist{0.5, 0.5, 0.0}, 0.25}, {Dist{0.0, 0.3, 0.7}, 0.007}};
  std::uniform_real_distribution<double> ub(0.05, 0.95);
  for (int i = 0; i < 6; ++i) {
    const int n = 2 + i % 2;
    Vec p = random_dist(n, rng).probs();
    p(i % n) = 0.0;
    if (p.sum() == 0.0) p((i + 1) % n) = 1.0;
    cases.push_back({Dist(p / p.sum(), 1e-10), ub(rng)});
  }
  int failed = 0;
  for (const auto& c : cases) {
    const auto res = oracle::prop1_check(c.mu, c.beta, 200);
    if (!res.holds) {
      ++failed;
      std::ostringstream os;
      os.precision(12);
      os << "mu=" << show(c.mu.probs()) << " beta=" << c.beta << " max=" << res.max_value
         << " log(1/beta)=" << std::log(1.0 / c.beta) << " bound_ok=" << res.bound_ok
         << " tight_ok=" << res.bound_tight_ok << " first maximizer="
         << (res.maximizers.empty() ? std::string("none") : show(res.maximizers.front()));
      dump(r, opt, os.str());
    }
  }
  r.summary = std::to_string(cases.size()) + " (mu, beta) cases on the 1/200 simplex grid, " + std::to_string(failed) +
              " failures";
  r.passed = failed == 0;
  r.seconds = timer.seconds();
  return r;
}

AuditResult audit_w1(const AuditOptions& opt) {
  Timer timer;
  AuditResult r;
  r.name = "w1";
  Rng rng(opt.seed + 5);

  // Oracle self-consistency: metric axioms and primal/dual agreement.
  int oracle_failures = 0;
  for (int k = 0; k < 200; ++k) {
    const TabularMDP mdp = TabularMDP::random(5, 2, 4, rng);
    const auto g = k % 2 ? oracle::MetricGraph::chain(5) : oracle::MetricGraph::from_mdp(mdp);
    const Dist a = random_dist(5, rng, 0.3), b = random_dist(5, rng, 0.3), c = random_dist(5, rng, 0.3);
    const auto ab = oracle::w1_exact(a, b, g);
    const double ba = oracle::w1_exact(b, a, g).value;
    const double ac = oracle::w1_exact(a, c, g).value;
    const double cb = oracle::w1_exact(c, b, g).value;
    const double dual = (a.probs() - b.probs()).dot(ab.potential);
    bool ok = ab.value >= 0.0 && ab.value <= ac + cb + 1e-12 && std::abs(dual - ab.value) <= 1e-9 &&
              oracle::w1_exact(a, a, g).value == 0.0;
    if (k % 2) ok = ok && std::abs(ab.value - ba) <= 1e-12;
    for (int u = 0; u < 5; ++u)
      for (int v : g.arcs()[u]) ok = ok && ab.potential(u) - ab.potential(v) <= 1.0 + 1e-12;
    if (!ok) {
      ++oracle_failures;
      dump(r, opt, "oracle instance " + std::to_string(k) + ": p=" + show(a.probs()) + " q=" + show(b.probs()));
    }
  }

  // Trained potentials against the flow value.
  const int n = 20;
  const std::pair<Dist, Dist> instances[] = {{Dist::dirac(n, n - 1), Dist::dirac(n, 0)},
                                             {Dist(Vec::Unit(n, 14) * 0.5 + Vec::Unit(n, 19) * 0.5),
                                              Dist(Vec::Unit(n, 0) * 0.5 + Vec::Unit(n, 5) * 0.5)}};
  int estimator_failures = 0;
  std::ostringstream detail;
  detail.precision(4);
  ChainDualSchedule sched;
  sched.steps = 3000;
  for (const auto& [p, q] : instances) {
    const auto fit = fit_chain_dual(p, q, opt.seed, sched);
    const double rel = std::abs(fit.estimate - fit.oracle) / fit.oracle;
    detail << " dual " << fit.estimate << " vs " << fit.oracle << ";";
    if (rel > 0.10 || fit.violation_frac > 0.05) {
      ++estimator_failures;
      std::ostringstream os;
      os << "p=" << show(p.probs()) << " q=" << show(q.probs()) << " estimate=" << fit.estimate
         << " oracle=" << fit.oracle << " violations=" << fit.violation_frac << " f=" << show(fit.potential);
      dump(r, opt, os.str());
    }
  }
  r.summary = "200 oracle instances (" + std::to_string(oracle_failures) + " failures), chain estimator:" +
              detail.str() + " " + std::to_string(estimator_failures) + " failures";
  r.passed = oracle_failures == 0 && estimator_failures == 0;
  r.seconds = timer.seconds();
  return r;
}

AuditResult audit_kl_ratio(const AuditOptions& opt) {
  Timer timer;
  AuditResult r;
  r.name = "kl_ratio";
  Rng rng(opt.seed + 6);
  const Dist rho = random_dist(10, rng);
  const Dist mu = random_dist(10, rng, 0.2);
  const auto fit = fit_kl_ratio(rho, mu, 0.1, opt.seed);
  std::ostringstream os;
  os.precision(4);
  os << "10 states, beta 0.1, max |logit - log-ratio| " << fit.max_err << " on states with mass >= 0.01";
  r.summary = os.str();
  r.passed = fit.max_err <= 0.1;
  if (!r.passed) dump(r, opt, "rho=" + show(rho.probs()) + " mu=" + show(mu.probs()) + " logit=" + show(fit.logit));
  r.seconds = timer.seconds();
  return r;
}

std::vector<std::string> audit_names() { return {"theorem1", "theorem2", "theorem3", "prop1", "w1", "kl_ratio"}; }

std::vector<AuditResult> run_audits(const AuditOptions& opt, const std::string& only) {
  const auto names = audit_names();
  if (!only.empty() && std::find(names.begin(), names.end(), only) == names.end())
    throw std::invalid_argument("unknown audit '" + only + "'");
  std::vector<AuditResult> out;
  auto want = [&](const char* name) { return only.empty() || only == name; };
  if (want("theorem1")) out.push_back(audit_theorem1(opt));
  if (want("theorem2")) out.push_back(audit_theorem2(opt));
  if (want("theorem3")) out.push_back(audit_theorem3(opt));
  if (want("prop1")) out.push_back(audit_prop1(opt));
  if (want("w1")) out.push_back(audit_w1(opt));
  if (want("kl_ratio")) out.push_back(audit_kl_ratio(opt));
  return out;
}

void print_result(std::ostream& out, const AuditResult& r) {
  out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(9) << r.name << ' ' << r.summary << " ("
      << std::fixed << std::setprecision(2) << r.seconds << "s)\n";
  out.unsetf(std::ios::fixed);
  for (const auto& c : r.counterexamples) out << "    counterexample: " << c << '\n';
}

KlRatioFit fit_kl_ratio(const Dist& rho, const Dist& mu, double beta, std::uint64_t seed,
                        const KlRatioSchedule& schedule, double min_mass) {
  const int n = static_cast<int>(rho.size());
  Rng rng(seed);
  KlConfig cfg;
  cfg.beta = beta;
  cfg.batch_size = schedule.batch_size;
  cfg.hidden = schedule.hidden;
  KlRewardModel model(n, cfg, rng);

  auto pos_dist = categorical(rho);
  auto mu_dist = categorical(mu);
  SampleSource src;
  src.positives = [&](int k, Rng& g) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (auto& i : idx) i = pos_dist(g);
    return one_hot_batch(idx, n);
  };
  src.negatives = [&](int k, Rng& g) {
    std::bernoulli_distribution present(beta);
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (auto& i : idx) i = present(g) ? pos_dist(g) : mu_dist(g);
    return one_hot_batch(idx, n);
  };
  for (const auto& [steps, lr] : schedule.phases) {
    model.set_learning_rate(lr);
    model.train(src, rng, steps);
  }

  KlRatioFit fit;
  fit.exact = oracle::kl_log_ratio(rho, mu, beta);
  fit.logit = model.net().forward(Mat(Mat::Identity(n, n))).row(0).transpose();
  for (int s = 0; s < n; ++s)
    if (rho[s] >= min_mass) fit.max_err = std::max(fit.max_err, std::abs(fit.logit(s) - fit.exact(s)));
  return fit;
}

ChainDualFit fit_chain_dual(const Dist& p, const Dist& q, std::uint64_t seed, const ChainDualSchedule& schedule) {
  const int n = static_cast<int>(p.size());
  if (n < 2 || q.size() != p.size()) throw std::invalid_argument("fit_chain_dual: need two distributions over >= 2 states");
  Rng rng(seed);
  WConfig cfg;
  cfg.beta = schedule.beta;
  cfg.batch_size = schedule.batch_size;
  cfg.lr = schedule.lr;
  cfg.hidden = schedule.hidden;
  WRewardModel model(1, cfg, rng);

  const Dist mix = oracle::mixture(p, q, schedule.beta);
  auto pd = categorical(p);
  auto md = categorical(mix);
  auto scalars = [](const std::vector<int>& idx) {
    Mat out(1, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out(0, static_cast<Eigen::Index>(j)) = idx[j];
    return out;
  };
  SampleSource src;
  src.positives = [&](int k, Rng& g) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (auto& i : idx) i = pd(g);
    return scalars(idx);
  };
  src.negatives = [&](int k, Rng& g) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (auto& i : idx) i = md(g);
    return scalars(idx);
  };
  src.transitions = [&](int k, Rng& g) {
    std::uniform_int_distribution<int> edge(0, n - 2);
    std::bernoulli_distribution flip(0.5);
    Mat s(1, k), s2(1, k);
    for (int j = 0; j < k; ++j) {
      const int i = edge(g);
      const bool f = flip(g);
      s(0, j) = f ? i + 1 : i;
      s2(0, j) = f ? i : i + 1;
    }
    return std::make_pair(s, s2);
  };
  model.train(src, rng, schedule.steps);

  ChainDualFit fit;
  Mat all(1, n);
  for (int i = 0; i < n; ++i) all(0, i) = i;
  fit.potential = model.rewards(all);
  fit.oracle = oracle::w1_exact(p, mix, oracle::MetricGraph::chain(n)).value;
  fit.estimate = (p.probs() - mix.probs()).dot(fit.potential);
  int violations = 0;
  for (int i = 0; i + 1 < n; ++i)
    if (std::abs(fit.potential(i + 1) - fit.potential(i)) > 1.0 + cfg.eps_relax) ++violations;
  fit.violation_frac = static_cast<double>(violations) / (n - 1);
  return fit;
}

}  // namespace ramp::audit
