#include "ramp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ramp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Rng stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

std::shared_ptr<const Env> make_maze(const RampConfig& cfg) {
  MazeSpec spec = maze_by_name(cfg.env.maze);
  spec.dt = cfg.env.dt;
  spec.horizon = cfg.env.horizon;
  spec.validate();
  return std::make_shared<MazeEnv>(std::move(spec));
}

GridSpec maze_grid(const Env& env, int resolution) {
  const auto& spec = dynamic_cast<const MazeEnv&>(env).spec();
  GridSpec g;
  g.lo = Vec(2);
  g.hi = Vec(2);
  g.lo << spec.lo.x(), spec.lo.y();
  g.hi << spec.hi.x(), spec.hi.y();
  g.resolution = resolution;
  return g;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

double intrinsic_weight(std::int64_t t, std::int64_t total) {
  if (total <= 0) throw std::invalid_argument("intrinsic_weight: total must be positive");
  if (t < 0) throw std::invalid_argument("intrinsic_weight: t must be >= 0");
  return std::max(0.0, 1.0 - 2.0 * static_cast<double>(t) / static_cast<double>(total));
}

double mix_reward(double r_ext, double r_int, double w, double alpha) { return r_ext + w * alpha * r_int; }

std::string epoch_csv_header() {
  return "epoch,env_steps,coverage_pct,entropy_est,mean_r_int,rm_loss,q1_loss,q2_loss,actor_loss,lambda,wall_s";
}

std::string epoch_csv_row(const EpochLog& l) {
  return std::to_string(l.epoch) + "," + std::to_string(l.env_steps) + "," + fmt(l.coverage_pct) + "," +
         fmt(l.entropy_est) + "," + fmt(l.mean_r_int) + "," + fmt(l.rm_loss) + "," + fmt(l.q1_loss) + "," +
         fmt(l.q2_loss) + "," + fmt(l.actor_loss) + "," + fmt(l.lambda) + "," + fmt(l.wall_s);
}

Trainer::Trainer(const RampConfig& cfg) : Trainer(cfg, make_maze(cfg), GridSpec{}) {}

Trainer::Trainer(const RampConfig& cfg, std::shared_ptr<const Env> env, GridSpec grid)
    : cfg_(cfg),
      env_(std::move(env)),
      grid_(grid.lo.size() ? std::move(grid) : maze_grid(*env_, cfg.trainer.coverage_resolution)),
      env_rng_(stream(cfg.seed, 1)),
      reward_rng_(stream(cfg.seed, 2)),
      sac_rng_(stream(cfg.seed, 3)),
      buffer_rng_(stream(cfg.seed, 4)),
      present_(cfg.buffers.episodes_per_epoch),
      past_(PastBuffer::init(*env_, random_policy(*env_), static_cast<std::size_t>(cfg.buffers.past_size),
                             cfg.buffers.beta, buffer_rng_)),
      agent_(env_->state_dim(), env_->action_dim(), cfg.sac, sac_rng_),
      coverage_(grid_) {
  cfg_.validate();
  if (cfg_.variant == Variant::kl)
    kl_.emplace(env_->state_dim(), cfg_.kl_config(), reward_rng_);
  else
    w_.emplace(env_->state_dim(), cfg_.w_config(), reward_rng_);
}

Vec Trainer::project(const Vec& s) const { return s.head(grid_.lo.size()); }

Vec Trainer::raw_rewards(const Mat& states) const { return kl_ ? kl_->rewards(states) : w_->rewards(states); }

double Trainer::intrinsic(const Vec& s_next) const { return kl_ ? kl_->reward(s_next) : w_->reward(s_next); }

double Trainer::relabel(const Transition& t) const {
  const double r_ext = cfg_.trainer.extrinsic ? t.r_ext : 0.0;
  if (cfg_.trainer.alpha == 0.0) return r_ext;
  const double w = cfg_.trainer.extrinsic ? intrinsic_weight(std::min(env_steps_, cfg_.total_steps()), cfg_.total_steps()) : 1.0;
  const double r_int = (intrinsic(t.s_next) - r_mean_) / r_scale_;
  return mix_reward(r_ext, r_int, w, cfg_.trainer.alpha);
}

const Transition& Trainer::replay_item(std::size_t i) const {
  return i < present_.size() ? present_[i] : past_[i - present_.size()];
}

SacBatch Trainer::sample_batch(int batch_size, Rng& rng, std::vector<std::size_t>* rows) const {
  const int sd = env_->state_dim();
  const int ad = env_->action_dim();
  SacBatch b;
  b.s.resize(sd, batch_size);
  b.a.resize(ad, batch_size);
  b.s_next.resize(sd, batch_size);
  b.r.resize(batch_size);
  b.done = Vec::Zero(batch_size);  // episodes end only by the time limit
  if (rows) rows->resize(batch_size);
  std::uniform_int_distribution<std::size_t> pick(0, replay_size() - 1);
  Vec r_ext(batch_size);
  for (int j = 0; j < batch_size; ++j) {
    const std::size_t i = pick(rng);
    if (rows) (*rows)[j] = i;
    const Transition& t = replay_item(i);
    b.s.col(j) = t.s;
    b.a.col(j) = t.a;
    b.s_next.col(j) = t.s_next;
    r_ext(j) = cfg_.trainer.extrinsic ? t.r_ext : 0.0;
  }
  if (cfg_.trainer.alpha == 0.0) {
    b.r = r_ext;
    return b;
  }
  const double w = cfg_.trainer.extrinsic ? intrinsic_weight(std::min(env_steps_, cfg_.total_steps()), cfg_.total_steps()) : 1.0;
  const Vec r_int = (raw_rewards(b.s_next).array() - r_mean_) / r_scale_;
  for (int j = 0; j < batch_size; ++j) b.r(j) = mix_reward(r_ext(j), r_int(j), w, cfg_.trainer.alpha);
  return b;
}

void Trainer::refresh_normalization() {
  r_mean_ = 0.0;
  r_scale_ = 1.0;
  if (!cfg_.normalize_intrinsic() || cfg_.trainer.alpha == 0.0) return;
  const std::size_t n = replay_size();
  Mat states(env_->state_dim(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) states.col(static_cast<Eigen::Index>(i)) = replay_item(i).s_next;
  const Vec r = raw_rewards(states);
  r_mean_ = r.mean();
  const double var = (r.array() - r_mean_).square().mean();
  r_scale_ = std::max(std::sqrt(var), 1e-8);
}

EpochLog Trainer::run_epoch() {
  ++epoch_;
  EpochLog log;
  log.epoch = epoch_;

  // (1) fresh present buffer from the current policy
  present_.clear();
  const Policy policy = [this](const Vec& s, Rng& rng) { return agent_.act(s, false, rng); };
  for (int e = 0; e < cfg_.buffers.episodes_per_epoch; ++e) {
    auto episode = rollout(*env_, policy, env_rng_);
    for (const auto& t : episode) {
      coverage_.update(project(t.s));
      coverage_.update(project(t.s_next));
    }
    env_steps_ += static_cast<std::int64_t>(episode.size());
    present_.add_episode(episode);
  }

  // (2) reward model
  const bool intrinsic_on = cfg_.trainer.alpha > 0.0;
  log.rm_loss = kNaN;
  if (intrinsic_on) log.rm_loss = kl_ ? kl_->train(present_, past_, reward_rng_) : w_->train(present_, past_, reward_rng_);
  log.lambda = w_ ? w_->lambda() : kNaN;

  // (3) policy improvement on relabeled replay
  refresh_normalization();
  const auto updates =
      static_cast<std::int64_t>(std::llround(cfg_.sac.updates_per_env_step * static_cast<double>(present_.size())));
  double q1 = 0.0, q2 = 0.0, actor = 0.0;
  for (std::int64_t u = 0; u < updates; ++u) {
    const SacBatch batch = sample_batch(cfg_.sac.batch_size, sac_rng_);
    const auto [l1, l2] = agent_.critic_update(batch, sac_rng_);
    actor += agent_.actor_update(batch.s, sac_rng_);
    agent_.target_soft_update();
    q1 += l1;
    q2 += l2;
  }
  log.q1_loss = updates ? q1 / static_cast<double>(updates) : kNaN;
  log.q2_loss = updates ? q2 / static_cast<double>(updates) : kNaN;
  log.actor_loss = updates ? actor / static_cast<double>(updates) : kNaN;

  // (4) past mixture
  for (const auto& t : present_.transitions()) past_.update(t, epoch_, buffer_rng_);

  if (intrinsic_on) {
    Mat landing(env_->state_dim(), static_cast<Eigen::Index>(present_.size()));
    for (std::size_t i = 0; i < present_.size(); ++i) landing.col(static_cast<Eigen::Index>(i)) = present_[i].s_next;
    log.mean_r_int = raw_rewards(landing).mean();
  } else {
    log.mean_r_int = kNaN;
  }
  Mat past_states(grid_.lo.size(), static_cast<Eigen::Index>(past_.size()));
  for (std::size_t i = 0; i < past_.size(); ++i) past_states.col(static_cast<Eigen::Index>(i)) = project(past_[i].s);
  log.entropy_est = histogram_entropy(past_states, grid_);
  log.coverage_pct = coverage_.value();
  log.env_steps = env_steps_;
  return log;
}

double Trainer::evaluate(int episodes) const {
  Rng rng = stream(cfg_.seed + static_cast<std::uint64_t>(epoch_), 5);
  const Policy policy = [this](const Vec& s, Rng& r) { return agent_.act(s, true, r); };
  double total = 0.0;
  for (int e = 0; e < episodes; ++e)
    for (const auto& t : rollout(*env_, policy, rng)) total += t.r_ext;
  return total / episodes;
}

void Trainer::write_scatter(std::ostream& out, int max_points) const {
  const std::size_t n = present_.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n > static_cast<std::size_t>(max_points)) {
    Rng rng = stream(cfg_.seed + static_cast<std::uint64_t>(epoch_), 6);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(max_points));
    std::sort(idx.begin(), idx.end());
  }
  out << "x,y,f_phi_value\n";
  for (std::size_t i : idx) {
    const Vec& s = present_[i].s_next;
    out << fmt(s(0)) << ',' << fmt(s.size() > 1 ? s(1) : 0.0) << ',' << fmt(intrinsic(s)) << '\n';
  }
}

void Trainer::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  save_mlp((d / "actor.bin").string(), agent_.actor);
  save_mlp((d / "q1.bin").string(), agent_.q1);
  save_mlp((d / "q2.bin").string(), agent_.q2);
  save_mlp((d / "q1_target.bin").string(), agent_.q1_target);
  save_mlp((d / "q2_target.bin").string(), agent_.q2_target);
  save_mlp((d / "reward.bin").string(), kl_ ? kl_->net() : w_->net());
  write_file(d / "config.json", serialize_config(cfg_));
  write_file(d / "state.csv", "epoch,env_steps,lambda,reward_mean,reward_scale\n" + std::to_string(epoch_) + "," +
                                  std::to_string(env_steps_) + "," + fmt(w_ ? w_->lambda() : kNaN) + "," +
                                  fmt(r_mean_) + "," + fmt(r_scale_) + "\n");
}

std::vector<EpochLog> run_training(const RampConfig& cfg, const RunOptions& opts) {
  namespace fs = std::filesystem;
  cfg.validate();
  const bool emit = !opts.out_dir.empty();
  const fs::path out(opts.out_dir);
  std::ofstream epochs, evals;
  if (emit) {
    fs::create_directories(out);
    write_file(out / "config.snapshot", serialize_config(cfg));
    epochs.open(out / "epochs.csv", std::ios::binary);
    if (!epochs) throw std::runtime_error("cannot write " + (out / "epochs.csv").string());
    epochs << epoch_csv_header() << '\n' << std::flush;
    if (cfg.trainer.eval_interval > 0) {
      evals.open(out / "eval.csv", std::ios::binary);
      evals << "epoch,env_steps,return\n" << std::flush;
    }
  }

  Trainer trainer(cfg);
  std::vector<EpochLog> logs;
  const int last = cfg.trainer.n_epochs + 1;
  for (int k = 1; k <= last; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochLog log = trainer.run_epoch();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.wall_s = cfg.trainer.log_wall_clock ? wall : 0.0;
    logs.push_back(log);
    if (emit) {
      epochs << epoch_csv_row(log) << '\n' << std::flush;
      const auto& tc = cfg.trainer;
      if (tc.eval_interval > 0 && (k % tc.eval_interval == 0 || k == last))
        evals << k << ',' << log.env_steps << ',' << fmt(trainer.evaluate(tc.eval_episodes)) << '\n' << std::flush;
      if (tc.scatter_interval > 0 && (k % tc.scatter_interval == 0 || k == last)) {
        std::ofstream sc(out / ("states_epoch_" + std::to_string(k) + ".csv"), std::ios::binary);
        trainer.write_scatter(sc, tc.scatter_points);
        std::ofstream bc(out / ("buffer_epoch_" + std::to_string(k) + ".csv"), std::ios::binary);
        write_buffer_csv(bc, trainer.present(), k, trainer.past());
      }
      if ((tc.checkpoint_interval > 0 && k % tc.checkpoint_interval == 0) || k == last)
        trainer.save_checkpoint((out / "checkpoints" / ("epoch_" + std::to_string(k))).string());
    }
    if (opts.on_epoch) opts.on_epoch(log, wall);
  }
  return logs;
}

}  // namespace ramp
