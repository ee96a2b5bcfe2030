#include "ramp/audits.hpp"
#include "ramp/oracle.hpp"
#include "ramp/reward_kl.hpp"

#include "support.hpp"

#include <doctest.h>

#include <memory>

using namespace ramp;

namespace {

Mat one_hot(const std::vector<int>& idx, int n) {
  Mat m = Mat::Zero(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) m(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  return m;
}

Mat draw(std::discrete_distribution<int>& d, int count, int n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(count));
  for (auto& i : idx) i = d(rng);
  return one_hot(idx, n);
}

// positives ~ p, negatives ~ q over n one-hot states
SampleSource categorical_source(const Vec& p, const Vec& q) {
  auto pd = std::make_shared<std::discrete_distribution<int>>(p.data(), p.data() + p.size());
  auto qd = std::make_shared<std::discrete_distribution<int>>(q.data(), q.data() + q.size());
  const int n = static_cast<int>(p.size());
  SampleSource src;
  src.positives = [pd, n](int count, Rng& rng) { return draw(*pd, count, n, rng); };
  src.negatives = [qd, n](int count, Rng& rng) { return draw(*qd, count, n, rng); };
  src.transitions = [pd, n](int count, Rng& rng) {
    Mat a = draw(*pd, count, n, rng);
    return std::make_pair(a, a);
  };
  return src;
}

const audit::KlRatioSchedule kShortSchedule{256, {{1500, 3e-3}, {1000, 3e-4}}, {64, 64}};

KlRewardModel constant_model(double value, double beta) {
  KlConfig cfg;
  cfg.beta = beta;
  Rng rng(0);
  KlRewardModel m(3, cfg, rng);
  m.net().params().setZero();
  m.net().bias(m.net().num_layers() - 1)(0) = value;
  return m;
}

}  // namespace

TEST_CASE("zero logit gives loss 2 log 2") {
  KlRewardModel m = constant_model(0.0, 0.1);
  Rng rng(1);
  const double loss = m.loss(test::uniform_mat(3, 40, -1, 1, rng), test::uniform_mat(3, 40, -1, 1, rng));
  CHECK(std::abs(loss - 2.0 * std::log(2.0)) <= 1e-14);
  CHECK(std::abs(loss - 1.386294) <= 1e-6);
}

TEST_CASE("reward clamps the raw logit") {
  CHECK(constant_model(10.0, 7e-3).reward(Vec::Zero(3)) == doctest::Approx(std::log(1.0 / 7e-3)).epsilon(1e-15));
  CHECK(std::abs(std::log(1.0 / 7e-3) - 4.9618) <= 1e-4);
  const KlRewardModel low = constant_model(-15.0, std::exp(-10.0));
  CHECK(low.clamp_low() == doctest::Approx(-10.0).epsilon(1e-15));
  CHECK(low.reward(Vec::Zero(3)) == doctest::Approx(-10.0).epsilon(1e-15));
  CHECK(constant_model(0.0, 0.5).reward(Vec::Zero(3)) == 0.0);
  CHECK(constant_model(0.3, 0.5).rewards(Mat::Zero(3, 2)).isApprox(Vec::Constant(2, 0.3)));
}

TEST_CASE("loss gradient matches central differences") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    KlConfig cfg;
    cfg.hidden = {8, 8};
    cfg.activation = Activation::tanh;
    KlRewardModel m(3, cfg, rng);
    const Mat pos = test::uniform_mat(3, 17, -1, 1, rng);
    const Mat neg = test::uniform_mat(3, 17, -1, 1, rng);
    Vec grad;
    const double value = m.loss_and_grad(pos, neg, grad);
    CHECK(value == doctest::Approx(m.loss(pos, neg)).epsilon(1e-12));
    CHECK(test::check_gradient(m.net().params(), grad, [&] { return m.loss(pos, neg); }).ok);
  }
}

TEST_CASE("zero training steps leave the model unchanged") {
  Rng rng(3);
  KlRewardModel m(10, KlConfig{}, rng);
  const Vec before = m.net().params();
  const SampleSource src = categorical_source(Vec::Constant(10, 0.1), Vec::Constant(10, 0.1));
  CHECK(m.train(src, rng, 0) == 0.0);
  CHECK(m.net().params() == before);
}

TEST_CASE("training loss decreases over the first steps") {
  Vec p = Vec::Zero(10), q = Vec::Zero(10);
  p.head(5).setConstant(0.2);
  q.tail(5).setConstant(0.2);
  const int seeds = 20, steps = 10;
  std::vector<double> mean_loss(steps + 1, 0.0);
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(100 + seed);
    KlRewardModel m(10, KlConfig{}, rng);
    const SampleSource src = categorical_source(p, q);
    const Mat pos = src.positives(2048, rng), neg = src.negatives(2048, rng);
    mean_loss[0] += m.loss(pos, neg) / seeds;
    for (int k = 1; k <= steps; ++k) {
      m.train(src, rng, 1);
      mean_loss[k] += m.loss(pos, neg) / seeds;
    }
  }
  for (int k = 1; k <= steps; ++k) CHECK(mean_loss[k] < mean_loss[k - 1]);
}

TEST_CASE("identical distributions give a near-zero logit") {
  Rng rng(4);
  const Dist p(test::random_simplex(10, rng));
  const auto fit = audit::fit_kl_ratio(p, p, 0.1, 5, kShortSchedule, 0.05);
  for (int s = 0; s < 10; ++s) CHECK(fit.exact(s) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.max_err <= 0.15);
}

TEST_CASE("disjoint distributions give the log(1/beta) logit") {
  Vec p = Vec::Zero(10), q = Vec::Zero(10);
  p.head(5).setConstant(0.2);
  q.tail(5).setConstant(0.2);
  const auto fit = audit::fit_kl_ratio(Dist(p), Dist(q), 0.1, 6, kShortSchedule);
  for (int s = 0; s < 5; ++s) {
    CHECK(fit.exact(s) == doctest::Approx(2.302585).epsilon(1e-6));
    CHECK(std::abs(fit.logit(s) - 2.302585) <= 0.1);
  }
}

TEST_CASE("trained classifier satisfies the Bayes identity") {
  Rng rng(7);
  const Dist rho(test::random_simplex(8, rng));
  const Dist mu(test::random_simplex(8, rng));
  const double beta = 0.2;
  const auto fit = audit::fit_kl_ratio(rho, mu, beta, 8, kShortSchedule);
  const Dist mix = oracle::mixture(rho, mu, beta);
  for (int s = 0; s < 8; ++s) {
    if (rho[s] < 0.01) continue;
    const double bayes = rho[s] / (rho[s] + mix[s]);
    CHECK(std::abs(sigmoid(fit.logit(s)) - bayes) <= 0.05);
  }
}

TEST_CASE("exact log-ratio never exceeds log(1/beta)") {
  Rng rng(9);
  std::uniform_real_distribution<double> ub(0.01, 0.99);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec mu_p = test::random_simplex(6, rng);
    if (trial % 2) mu_p(trial % 6) = 0.0;
    mu_p /= mu_p.sum();
    const Dist rho(test::random_simplex(6, rng));
    const Dist mu(mu_p);
    const double beta = ub(rng);
    const Vec r = oracle::kl_log_ratio(rho, mu, beta);
    for (int s = 0; s < 6; ++s) {
      CHECK(r(s) <= std::log(1.0 / beta) + 1e-12);
      if (mu[s] == 0.0) CHECK(r(s) == doctest::Approx(std::log(1.0 / beta)).epsilon(1e-12));
      else CHECK(r(s) < std::log(1.0 / beta));
    }
  }
}

TEST_CASE("swapping positives and negatives flips the logit sign") {
  Vec a = Vec::Zero(6), b = Vec::Zero(6);
  a << 0.4, 0.3, 0.3, 0, 0, 0;
  b << 0, 0, 0, 0.5, 0.25, 0.25;
  int agree = 0, total = 0;
  for (int seed = 0; seed < 5; ++seed) {
    Rng r1(200 + seed), r2(300 + seed);
    KlRewardModel m1(6, KlConfig{}, r1), m2(6, KlConfig{}, r2);
    m1.train(categorical_source(a, b), r1, 300);
    m2.train(categorical_source(b, a), r2, 300);
    for (int s = 0; s < 6; ++s) {
      const Vec x = one_hot({s}, 6).col(0);
      agree += (m1.logit(x) > 0) != (m2.logit(x) > 0);
      ++total;
    }
  }
  CHECK(agree == total);
}

TEST_CASE("model construction validates beta") {
  Rng rng(10);
  KlConfig cfg;
  cfg.beta = 1.0;
  CHECK_THROWS_AS(KlRewardModel(2, cfg, rng), std::invalid_argument);
  cfg.beta = 0.0;
  CHECK_THROWS_AS(KlRewardModel(2, cfg, rng), std::invalid_argument);
}
