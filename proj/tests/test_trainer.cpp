#include "ramp/oracle.hpp"
#include "ramp/trainer.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ramp;
namespace fs = std::filesystem;

namespace {

RampConfig tiny(Variant v = Variant::w) {
  RampConfig cfg;
  cfg.variant = v;
  cfg.seed = 3;
  cfg.env.maze = "u";
  cfg.env.horizon = 50;
  cfg.buffers.past_size = 300;
  cfg.buffers.episodes_per_epoch = 2;
  cfg.buffers.beta = 0.2;
  cfg.reward.steps_per_epoch = 20;
  cfg.reward.batch_size = 32;
  cfg.reward.hidden = {16, 16};
  cfg.sac.batch_size = 32;
  cfg.sac.hidden = {16, 16};
  cfg.trainer.n_epochs = 2;
  cfg.trainer.eval_interval = 0;
  cfg.trainer.scatter_interval = 0;
  cfg.reward.normalize = v == Variant::w;
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ramp_test_trainer_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("intrinsic weight decays linearly to zero at half time") {
  CHECK(intrinsic_weight(0, 1000) == 1.0);
  CHECK(intrinsic_weight(500, 1000) == 0.0);
  CHECK(intrinsic_weight(250, 1000) == 0.5);
  CHECK(intrinsic_weight(1000, 1000) == 0.0);
  double prev = 2.0;
  for (std::int64_t t = 0; t <= 999; ++t) {
    const double w = intrinsic_weight(t, 999);
    CHECK(w <= prev);
    CHECK(w >= 0.0);
    if (2 * t >= 999) CHECK(w == 0.0);
    prev = w;
  }
  CHECK_THROWS_AS(intrinsic_weight(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(intrinsic_weight(-1, 10), std::invalid_argument);
}

TEST_CASE("reward mixing") {
  CHECK(mix_reward(0.3, 5.0, 0.0, 1.0) == 0.3);
  CHECK(mix_reward(0.0, 2.5, 1.0, 1.0) == 2.5);
  CHECK(mix_reward(0.5, 2.0, 0.5, 0.1) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("present buffer holds exactly the current epoch's episodes") {
  RampConfig cfg = tiny();
  cfg.buffers.episodes_per_epoch = 1;
  cfg.env.horizon = 5;
  Trainer t(cfg);
  for (int k = 1; k <= 3; ++k) {
    const EpochLog log = t.run_epoch();
    CHECK(t.present().size() == 5);
    CHECK(t.present().num_episodes() == 1);
    CHECK(log.env_steps == 5 * k);
    CHECK(t.past().size() == 300);
    for (std::size_t i = 0; i < t.past().size(); ++i) CHECK(t.past().epoch_tag(i) <= k);
  }
}

TEST_CASE("seeded epochs are reproducible") {
  for (Variant v : {Variant::kl, Variant::w}) {
    Trainer a(tiny(v)), b(tiny(v));
    for (int k = 0; k < 2; ++k) CHECK(epoch_csv_row(a.run_epoch()) == epoch_csv_row(b.run_epoch()));
    CHECK(a.agent().actor == b.agent().actor);
  }
}

TEST_CASE("different seeds give different runs") {
  RampConfig c1 = tiny(), c2 = tiny();
  c2.seed = 4;
  Trainer a(c1), b(c2);
  CHECK(epoch_csv_row(a.run_epoch()) != epoch_csv_row(b.run_epoch()));
}

TEST_CASE("minibatch rewards are relabeled with the current reward model") {
  for (Variant v : {Variant::kl, Variant::w}) {
    for (bool extrinsic : {false, true}) {
      RampConfig cfg = tiny(v);
      cfg.trainer.extrinsic = extrinsic;
      cfg.trainer.alpha = 0.7;
      Trainer t(cfg);
      t.run_epoch();
      const double w = extrinsic ? intrinsic_weight(t.env_steps(), cfg.total_steps()) : 1.0;
      Rng rng(9);
      std::vector<std::size_t> rows;
      const SacBatch b = t.sample_batch(64, rng, &rows);
      CHECK(b.done.isZero(0.0));
      for (int j = 0; j < 64; ++j) {
        const Transition& tr = t.replay_item(rows[j]);
        CHECK(b.s_next.col(j) == tr.s_next);
        const double r_int = (t.intrinsic(tr.s_next) - t.reward_mean()) / t.reward_scale();
        const double expected = mix_reward(extrinsic ? tr.r_ext : 0.0, r_int, w, 0.7);
        CHECK(b.r(j) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(t.relabel(tr) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("intrinsic normalization uses the whole replay") {
  // beta ~ 0 keeps D_mu as it was when the statistics were taken
  RampConfig frozen = tiny(Variant::w);
  frozen.buffers.beta = 1e-12;
  Trainer f(frozen);
  f.run_epoch();
  std::vector<double> r;
  for (std::size_t i = 0; i < f.replay_size(); ++i) r.push_back(f.intrinsic(f.replay_item(i).s_next));
  double mean = 0.0, var = 0.0;
  for (double x : r) mean += x / r.size();
  for (double x : r) var += (x - mean) * (x - mean) / r.size();
  CHECK(f.reward_mean() == doctest::Approx(mean).epsilon(1e-10));
  CHECK(f.reward_scale() == doctest::Approx(std::sqrt(var)).epsilon(1e-10));

  Trainer kl(tiny(Variant::kl));
  kl.run_epoch();
  CHECK(kl.reward_mean() == 0.0);
  CHECK(kl.reward_scale() == 1.0);
}

TEST_CASE("alpha zero skips the reward model") {
  RampConfig cfg = tiny(Variant::w);
  cfg.trainer.alpha = 0.0;
  Trainer t(cfg);
  const Vec before = t.w_model()->net().params();
  const EpochLog log = t.run_epoch();
  CHECK(std::isnan(log.rm_loss));
  CHECK(std::isnan(log.mean_r_int));
  CHECK(t.w_model()->net().params() == before);
  Rng rng(1);
  CHECK(t.sample_batch(16, rng).r.isZero(0.0));
}

TEST_CASE("epoch logs carry the expected telemetry") {
  Trainer kl(tiny(Variant::kl));
  const EpochLog a = kl.run_epoch();
  CHECK(a.epoch == 1);
  CHECK(std::isnan(a.lambda));
  CHECK(std::isfinite(a.rm_loss));
  CHECK(a.coverage_pct > 0.0);
  CHECK(a.coverage_pct <= 100.0);
  CHECK(a.entropy_est > 0.0);

  Trainer w(tiny(Variant::w));
  const EpochLog b = w.run_epoch();
  CHECK(b.lambda == w.w_model()->lambda());
  CHECK(b.wall_s == 0.0);
  const std::string header = epoch_csv_header();
  CHECK(std::count(header.begin(), header.end(), ',') == 10);
  const std::string row = epoch_csv_row(b);
  CHECK(std::count(row.begin(), row.end(), ',') == 10);
}

TEST_CASE("coverage never decreases") {
  Trainer t(tiny());
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double c = t.run_epoch().coverage_pct;
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("run_training with N = 0 runs one epoch and writes the run directory") {
  RampConfig cfg = tiny();
  cfg.trainer.n_epochs = 0;
  cfg.trainer.eval_interval = 1;
  cfg.trainer.scatter_interval = 1;
  const fs::path dir = scratch_dir("n0");
  RunOptions opts;
  opts.out_dir = (dir / "nested" / "run").string();
  int callbacks = 0;
  opts.on_epoch = [&](const EpochLog&, double) { ++callbacks; };
  const auto logs = run_training(cfg, opts);
  CHECK(logs.size() == 1);
  CHECK(callbacks == 1);
  const fs::path run = opts.out_dir;
  for (const char* f : {"config.snapshot", "epochs.csv", "eval.csv", "states_epoch_1.csv", "buffer_epoch_1.csv",
                        "checkpoints/epoch_1/actor.bin", "checkpoints/epoch_1/reward.bin",
                        "checkpoints/epoch_1/config.json", "checkpoints/epoch_1/state.csv"})
    CHECK(fs::exists(run / f));
  CHECK(read_file(run / "epochs.csv") == epoch_csv_header() + "\n" + epoch_csv_row(logs[0]) + "\n");
  CHECK(parse_config(read_file(run / "config.snapshot")) == parse_config(serialize_config(cfg)));
  const std::string scatter = read_file(run / "states_epoch_1.csv");
  CHECK(scatter.rfind("x,y,f_phi_value\n", 0) == 0);
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 1 + 2 * 50);
  fs::remove_all(dir);
}

TEST_CASE("run_training executes N + 1 epochs") {
  RampConfig cfg = tiny();
  cfg.trainer.n_epochs = 3;
  const auto logs = run_training(cfg);
  REQUIRE(logs.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(logs[k].epoch == k + 1);
    CHECK(logs[k].env_steps == (k + 1) * 100);
  }
}

TEST_CASE("checkpointed reward network reproduces the scatter values") {
  RampConfig cfg = tiny(Variant::kl);
  Trainer t(cfg);
  t.run_epoch();
  const fs::path dir = scratch_dir("ckpt");
  t.save_checkpoint(dir.string());
  const Mlp net = load_mlp((dir / "reward.bin").string());
  CHECK(net == t.kl_model()->net());
  CHECK(load_mlp((dir / "actor.bin").string()) == t.agent().actor);
  CHECK(parse_config(read_file(dir / "config.json")) == parse_config(serialize_config(cfg)));
  fs::remove_all(dir);
}

TEST_CASE("one exact RAMP epoch improves the KL objective on tabular MDPs") {
  // Step (2) uses the exact log-ratio reward, step (3) enumerates all
  // deterministic policies instead of running SAC.
  const double beta = 0.1, lambda_a = 0.1;
  const auto policies = enumerate_deterministic_policies(6, 2);
  int improved = 0, compared = 0;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const TabularMDP mdp = seed % 2 ? TabularMDP::random(6, 2, 10, rng) : TabularMDP::chain(6, 10, 0.1);
    const Dist mu = exact_occupancy(mdp, PolicyTable::Constant(6, 2, 0.5));
    const PolicyTable& pi = policies[std::uniform_int_distribution<std::size_t>(0, policies.size() - 1)(rng)];
    Vec r = oracle::kl_log_ratio(exact_occupancy(mdp, pi), mu, beta);
    r = r.unaryExpr([&](double x) { return std::isfinite(x) ? x : std::log(beta); });

    std::size_t best = 0;
    double best_value = -INFINITY;
    for (std::size_t i = 0; i < policies.size(); ++i) {
      const double v = exact_occupancy(mdp, policies[i]).probs().dot(r);
      if (v > best_value + 1e-15) {
        best_value = v;
        best = i;
      }
    }
    if (policies[best] == pi) continue;  // already a fixed point
    ++compared;
    const double before = oracle::ramp_kl_objective(mdp, pi, mu, beta, lambda_a);
    const double after = oracle::ramp_kl_objective(mdp, policies[best], mu, beta, lambda_a);
    CAPTURE(seed);
    CHECK(after > before);
    improved += after > before;
  }
  CHECK(compared >= 30);
  CHECK(improved == compared);
}
