#include "ramp/config.hpp"

#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace ramp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(RAMP_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const std::string kSmoke = std::string(RAMP_SOURCE_DIR) + "/configs/smoke.json";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ramp_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config errors name the offending key") {
  CHECK(config_error(R"({"buffers": {"beta": 1.5}})") == "t.json: buffers.beta: must lie in (0,1), got 1.5");
  CHECK(config_error(R"({"buffers": {"betta": 0.1}})") == "t.json: buffers.betta: unknown key");
  CHECK(config_error(R"({"sac": {"batch_size": "big"}})") == "t.json: sac.batch_size: expected an integer");
  CHECK(config_error(R"({"variant": "l2"})") == "t.json: variant: expected \"kl\" or \"w\", got \"l2\"");
  CHECK(config_error(R"({"reward": {"activation": "gelu"}})") ==
        "t.json: reward.activation: unknown activation 'gelu' (expected relu or tanh)");
  CHECK(config_error("{\"seed\": 1,}").rfind("t.json: malformed JSON", 0) == 0);
  CHECK(config_error(R"({"trainer": {"n_epochs": -1}})").find("trainer.n_epochs") != std::string::npos);
  CHECK(config_error(R"({"buffers": {"episodes_per_epoch": 0}})").find("buffers.episodes_per_epoch") !=
        std::string::npos);
}

TEST_CASE("config defaults and resolution") {
  const RampConfig w = parse_config("{}");
  CHECK(w.variant == Variant::w);
  CHECK(w.buffers.beta == 7e-3);
  CHECK(w.buffers.past_size == 100000);
  CHECK(w.sac.lambda_a == 0.1);
  CHECK(w.reward.normalize == true);
  CHECK(w.total_steps() == 100 * 10 * 200);
  const RampConfig kl = parse_config(R"({"variant": "kl"})");
  CHECK(kl.reward.normalize == false);
  CHECK(kl.kl_config().beta == kl.buffers.beta);
  CHECK(parse_config(R"({"variant": "kl", "reward": {"normalize": true}})").normalize_intrinsic());
}

TEST_CASE("config serialization round-trips") {
  RampConfig cfg = parse_config(read_file(kSmoke));
  cfg.sac.hidden = {7, 9};
  cfg.reward.activation = Activation::tanh;
  cfg.trainer.total_env_steps = 12345;
  cfg.seed = 18446744073709551615ull;
  const std::string text = serialize_config(cfg);
  const RampConfig back = parse_config(text);
  CHECK(back == cfg);
  CHECK(serialize_config(back) == text);
}

TEST_CASE("run writes a fresh nested output directory") {
  const fs::path dir = scratch("run");
  const Run r = cli("run --quiet --config " + kSmoke + " --out " + (dir / "a" / "b").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "a" / "b" / "epochs.csv"));
  CHECK(fs::exists(dir / "a" / "b" / "config.snapshot"));
  CHECK(fs::exists(dir / "a" / "b" / "states_epoch_2.csv"));
  CHECK(fs::exists(dir / "a" / "b" / "checkpoints" / "epoch_2" / "reward.bin"));
  fs::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical epochs.csv") {
  const fs::path dir = scratch("det");
  REQUIRE(cli("run --quiet --config " + kSmoke + " --out " + (dir / "x").string()).code == 0);
  REQUIRE(cli("run --quiet --config " + kSmoke + " --out " + (dir / "y").string()).code == 0);
  REQUIRE(cli("run --quiet --config " + kSmoke + " --seed 5 --out " + (dir / "z").string()).code == 0);
  const std::string x = read_file(dir / "x" / "epochs.csv");
  CHECK(x.size() > 100);
  CHECK(x == read_file(dir / "y" / "epochs.csv"));
  CHECK(x != read_file(dir / "z" / "epochs.csv"));
  CHECK(parse_config(read_file(dir / "z" / "config.snapshot")).seed == 5);
  fs::remove_all(dir);
}

TEST_CASE("plotdata reproduces the stored scatter and recomputes from checkpoints") {
  const fs::path dir = scratch("plot");
  REQUIRE(cli("run --quiet --config " + kSmoke + " --out " + dir.string()).code == 0);
  const Run direct = cli("plotdata --run " + dir.string() + " --epoch 2");
  CHECK(direct.code == 0);
  CHECK(direct.out == read_file(dir / "states_epoch_2.csv"));

  // Without the stored scatter the values come from the checkpointed reward net.
  fs::remove(dir / "states_epoch_2.csv");
  const Run recomputed = cli("plotdata --run " + dir.string() + " --epoch 2 --out " + (dir / "p.csv").string());
  CHECK(recomputed.code == 0);
  const std::string text = read_file(dir / "p.csv");
  CHECK(text.rfind("x,y,f_phi_value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') > 100);

  CHECK(cli("plotdata --run " + dir.string() + " --epoch 9").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep runs one directory per seed") {
  const fs::path dir = scratch("sweep");
  const Run r = cli("sweep --config " + kSmoke + " --seeds 3,4 --out " + dir.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "seed3" / "epochs.csv"));
  CHECK(fs::exists(dir / "seed4" / "epochs.csv"));
  CHECK(r.out.find("seed 3: final coverage") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("verify runs a single audit") {
  const Run r = cli("verify --only theorem1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS theorem1", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
  CHECK(cli("verify --only prop1").code == 0);
  CHECK(cli("verify --only nonsense").code != 0);
}

TEST_CASE("bad invocations fail cleanly") {
  CHECK(cli("").code != 0);
  CHECK(cli("run --config /nonexistent.json").code != 0);
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"buffers": {"beta": 1.5}})";
  const Run r = cli("run --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("buffers.beta: must lie in (0,1), got 1.5") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
  fs::remove_all(dir);
}
