#include "ramp/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

namespace ramp {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& msg) {
  throw ConfigError(origin + ": " + key + ": " + msg);
}

class Section {
 public:
  Section(const json& obj, std::string origin, std::string prefix)
      : obj_(obj), origin_(std::move(origin)), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) fail(origin_, prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(origin_, path(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(origin_, path(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (!v->is_number_unsigned()) fail(origin_, path(key), "expected a nonnegative integer");
        out = v->get<Int>();
      } else {
        const auto wide = v->get<std::int64_t>();
        if (wide < std::numeric_limits<Int>::min() || wide > std::numeric_limits<Int>::max())
          fail(origin_, path(key), "integer out of range");
        out = static_cast<Int>(wide);
      }
    }
  }

  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(origin_, path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(origin_, path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void get(const std::string& key, std::vector<int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(origin_, path(key), "expected an array of integers");
      std::vector<int> tmp;
      for (const auto& e : *v) {
        if (!e.is_number_integer()) fail(origin_, path(key), "expected an array of integers");
        tmp.push_back(e.get<int>());
      }
      out = std::move(tmp);
    }
  }

  void get(const std::string& key, Activation& out) {
    std::string name = to_string(out);
    get(key, name);
    if (name == "relu")
      out = Activation::relu;
    else if (name == "tanh")
      out = Activation::tanh;
    else
      fail(origin_, path(key), "unknown activation '" + name + "' (expected relu or tanh)");
  }

  void get(const std::string& key, std::optional<bool>& out) {
    if (const json* v = find(key)) {
      if (v->is_null())
        out.reset();
      else if (v->is_boolean())
        out = v->get<bool>();
      else
        fail(origin_, path(key), "expected true, false or null");
    }
  }

  std::optional<Section> child(const std::string& key) {
    if (const json* v = find(key)) return Section(*v, origin_, path(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) fail(origin_, path(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string origin_;
  std::string prefix_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key + ": " + msg);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::kl ? "kl" : "w"; }

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

void RampConfig::validate() const {
  check(!env.maze.empty(), "env.maze", "must not be empty");
  check(env.dt > 0.0 && std::isfinite(env.dt), "env.dt", "must be positive, got " + fmt(env.dt));
  check(env.horizon >= 1, "env.horizon", "must be >= 1");

  check(buffers.beta > 0.0 && buffers.beta < 1.0, "buffers.beta", "must lie in (0,1), got " + fmt(buffers.beta));
  check(buffers.past_size >= 1, "buffers.past_size", "must be >= 1");
  check(buffers.episodes_per_epoch >= 1, "buffers.episodes_per_epoch", "must be >= 1");

  check(reward.batch_size >= 1, "reward.batch_size", "must be >= 1");
  check(reward.steps_per_epoch >= 0, "reward.steps_per_epoch", "must be >= 0");
  check(reward.lr > 0.0, "reward.lr", "must be positive");
  check(!reward.hidden.empty(), "reward.hidden", "needs at least one layer");
  for (int h : reward.hidden) check(h >= 1, "reward.hidden", "layer widths must be >= 1");
  check(reward.eps_relax > 0.0, "reward.eps_relax", "must be positive");
  check(reward.lr_lambda >= 0.0, "reward.lr_lambda", "must be >= 0");
  check(reward.lambda0 >= 0.0, "reward.lambda0", "must be >= 0");

  check(sac.gamma > 0.0 && sac.gamma < 1.0, "sac.gamma", "must lie in (0,1), got " + fmt(sac.gamma));
  check(sac.tau > 0.0 && sac.tau <= 1.0, "sac.tau", "must lie in (0,1], got " + fmt(sac.tau));
  check(sac.lambda_a >= 0.0, "sac.lambda_a", "must be >= 0");
  check(sac.lr_actor > 0.0, "sac.lr_actor", "must be positive");
  check(sac.lr_critic > 0.0, "sac.lr_critic", "must be positive");
  check(sac.batch_size >= 1, "sac.batch_size", "must be >= 1");
  check(sac.updates_per_env_step >= 0.0, "sac.updates_per_env_step", "must be >= 0");
  check(!sac.hidden.empty(), "sac.hidden", "needs at least one layer");
  for (int h : sac.hidden) check(h >= 1, "sac.hidden", "layer widths must be >= 1");

  check(trainer.n_epochs >= 0, "trainer.n_epochs", "must be >= 0");
  check(trainer.total_env_steps >= 0, "trainer.total_env_steps", "must be >= 0");
  check(trainer.alpha >= 0.0, "trainer.alpha", "must be >= 0");
  check(trainer.eval_interval >= 0, "trainer.eval_interval", "must be >= 0");
  check(trainer.eval_episodes >= 1, "trainer.eval_episodes", "must be >= 1");
  check(trainer.checkpoint_interval >= 0, "trainer.checkpoint_interval", "must be >= 0");
  check(trainer.scatter_interval >= 0, "trainer.scatter_interval", "must be >= 0");
  check(trainer.scatter_points >= 1, "trainer.scatter_points", "must be >= 1");
  check(trainer.coverage_resolution >= 1, "trainer.coverage_resolution", "must be >= 1");
}

bool RampConfig::normalize_intrinsic() const { return reward.normalize.value_or(variant == Variant::w); }

std::int64_t RampConfig::steps_per_epoch() const {
  return static_cast<std::int64_t>(buffers.episodes_per_epoch) * env.horizon;
}

std::int64_t RampConfig::total_steps() const {
  if (trainer.total_env_steps > 0) return trainer.total_env_steps;
  return (static_cast<std::int64_t>(trainer.n_epochs) + 1) * steps_per_epoch();
}

KlConfig RampConfig::kl_config() const {
  KlConfig c;
  c.beta = buffers.beta;
  c.batch_size = reward.batch_size;
  c.steps_per_epoch = reward.steps_per_epoch;
  c.lr = reward.lr;
  c.hidden = reward.hidden;
  c.activation = reward.activation;
  return c;
}

WConfig RampConfig::w_config() const {
  WConfig c;
  c.beta = buffers.beta;
  c.eps_relax = reward.eps_relax;
  c.lr_lambda = reward.lr_lambda;
  c.lambda0 = reward.lambda0;
  c.batch_size = reward.batch_size;
  c.steps_per_epoch = reward.steps_per_epoch;
  c.lr = reward.lr;
  c.hidden = reward.hidden;
  c.activation = reward.activation;
  return c;
}

RampConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": malformed JSON: " + e.what());
  }

  RampConfig cfg;
  Section root(doc, origin, "");
  std::string variant = to_string(cfg.variant);
  root.get("variant", variant);
  if (variant == "kl")
    cfg.variant = Variant::kl;
  else if (variant == "w")
    cfg.variant = Variant::w;
  else
    fail(origin, "variant", "expected \"kl\" or \"w\", got \"" + variant + "\"");
  root.get("seed", cfg.seed);

  if (auto s = root.child("env")) {
    s->get("maze", cfg.env.maze);
    s->get("dt", cfg.env.dt);
    s->get("horizon", cfg.env.horizon);
    s->finish();
  }
  if (auto s = root.child("buffers")) {
    s->get("beta", cfg.buffers.beta);
    s->get("past_size", cfg.buffers.past_size);
    s->get("episodes_per_epoch", cfg.buffers.episodes_per_epoch);
    s->finish();
  }
  if (auto s = root.child("reward")) {
    s->get("batch_size", cfg.reward.batch_size);
    s->get("steps_per_epoch", cfg.reward.steps_per_epoch);
    s->get("lr", cfg.reward.lr);
    s->get("hidden", cfg.reward.hidden);
    s->get("activation", cfg.reward.activation);
    s->get("eps_relax", cfg.reward.eps_relax);
    s->get("lr_lambda", cfg.reward.lr_lambda);
    s->get("lambda0", cfg.reward.lambda0);
    s->get("normalize", cfg.reward.normalize);
    s->finish();
  }
  if (auto s = root.child("sac")) {
    s->get("gamma", cfg.sac.gamma);
    s->get("tau", cfg.sac.tau);
    s->get("lambda_a", cfg.sac.lambda_a);
    s->get("lr_actor", cfg.sac.lr_actor);
    s->get("lr_critic", cfg.sac.lr_critic);
    s->get("batch_size", cfg.sac.batch_size);
    s->get("updates_per_env_step", cfg.sac.updates_per_env_step);
    s->get("hidden", cfg.sac.hidden);
    s->get("activation", cfg.sac.activation);
    s->finish();
  }
  if (auto s = root.child("trainer")) {
    s->get("n_epochs", cfg.trainer.n_epochs);
    s->get("total_env_steps", cfg.trainer.total_env_steps);
    s->get("alpha", cfg.trainer.alpha);
    s->get("extrinsic", cfg.trainer.extrinsic);
    s->get("eval_interval", cfg.trainer.eval_interval);
    s->get("eval_episodes", cfg.trainer.eval_episodes);
    s->get("checkpoint_interval", cfg.trainer.checkpoint_interval);
    s->get("scatter_interval", cfg.trainer.scatter_interval);
    s->get("scatter_points", cfg.trainer.scatter_points);
    s->get("coverage_resolution", cfg.trainer.coverage_resolution);
    s->get("log_wall_clock", cfg.trainer.log_wall_clock);
    s->finish();
  }
  root.finish();

  if (!cfg.reward.normalize) cfg.reward.normalize = cfg.variant == Variant::w;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RampConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string serialize_config(const RampConfig& cfg) {
  ordered_json out;
  out["variant"] = to_string(cfg.variant);
  out["seed"] = cfg.seed;
  out["env"] = {{"maze", cfg.env.maze}, {"dt", cfg.env.dt}, {"horizon", cfg.env.horizon}};
  out["buffers"] = {{"beta", cfg.buffers.beta},
                    {"past_size", cfg.buffers.past_size},
                    {"episodes_per_epoch", cfg.buffers.episodes_per_epoch}};
  ordered_json reward = {{"batch_size", cfg.reward.batch_size},
                         {"steps_per_epoch", cfg.reward.steps_per_epoch},
                         {"lr", cfg.reward.lr},
                         {"hidden", cfg.reward.hidden},
                         {"activation", to_string(cfg.reward.activation)},
                         {"eps_relax", cfg.reward.eps_relax},
                         {"lr_lambda", cfg.reward.lr_lambda},
                         {"lambda0", cfg.reward.lambda0}};
  reward["normalize"] = cfg.normalize_intrinsic();
  out["reward"] = reward;
  out["sac"] = {{"gamma", cfg.sac.gamma},
                {"tau", cfg.sac.tau},
                {"lambda_a", cfg.sac.lambda_a},
                {"lr_actor", cfg.sac.lr_actor},
                {"lr_critic", cfg.sac.lr_critic},
                {"batch_size", cfg.sac.batch_size},
                {"updates_per_env_step", cfg.sac.updates_per_env_step},
                {"hidden", cfg.sac.hidden},
                {"activation", to_string(cfg.sac.activation)}};
  out["trainer"] = {{"n_epochs", cfg.trainer.n_epochs},
                    {"total_env_steps", cfg.trainer.total_env_steps},
                    {"alpha", cfg.trainer.alpha},
                    {"extrinsic", cfg.trainer.extrinsic},
                    {"eval_interval", cfg.trainer.eval_interval},
                    {"eval_episodes", cfg.trainer.eval_episodes},
                    {"checkpoint_interval", cfg.trainer.checkpoint_interval},
                    {"scatter_interval", cfg.trainer.scatter_interval},
                    {"scatter_points", cfg.trainer.scatter_points},
                    {"coverage_resolution", cfg.trainer.coverage_resolution},
                    {"log_wall_clock", cfg.trainer.log_wall_clock}};
  return out.dump(2) + "\n";
}

}  // namespace ramp
