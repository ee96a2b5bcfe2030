#include "ramp/audits.hpp"
#include "ramp/config.hpp"
#include "ramp/trainer.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out_dir, bool quiet) {
  ramp::RampConfig cfg = ramp::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = (fs::path("runs") / (fs::path(config_path).stem().string() + "-seed" + std::to_string(cfg.seed))).string();
  ramp::RunOptions opts;
  opts.out_dir = out_dir;
  if (!quiet)
    opts.on_epoch = [&](const ramp::EpochLog& log, double wall) {
      std::fprintf(stderr, "epoch %4d  steps %8lld  coverage %6.2f%%  entropy %.4f  rm_loss %.4f  %.1fs\n", log.epoch,
                   static_cast<long long>(log.env_steps), log.coverage_pct, log.entropy_est, log.rm_loss, wall);
    };
  const auto logs = ramp::run_training(cfg, opts);
  std::printf("%s: %zu epochs, final coverage %.2f%%\n", out_dir.c_str(), logs.size(), logs.back().coverage_pct);
  return 0;
}

int cmd_verify(const std::string& only, std::uint64_t seed) {
  ramp::audit::AuditOptions opt;
  opt.seed = seed;
  bool ok = true;
  for (const auto& name : ramp::audit::audit_names()) {
    if (!only.empty() && name != only) continue;
    const auto results = ramp::audit::run_audits(opt, name);
    for (const auto& r : results) {
      ramp::audit::print_result(std::cout, r);
      std::cout.flush();
      ok = ok && r.passed;
    }
  }
  return ok ? 0 : 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = std::stoull(item.substr(0, dash));
      const auto hi = std::stoull(item.substr(dash + 1));
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(std::stoull(item));
    }
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

int cmd_sweep(const std::string& config_path, const std::string& seed_spec, std::string out_dir, bool parallel) {
  const ramp::RampConfig base = ramp::load_config(config_path);
  const auto seeds = parse_seeds(seed_spec);
  if (out_dir.empty()) out_dir = (fs::path("runs") / (fs::path(config_path).stem().string() + "-sweep")).string();
  auto run_dir = [&](std::uint64_t s) { return (fs::path(out_dir) / ("seed" + std::to_string(s))).string(); };
  auto run_one = [&](std::uint64_t s) {
    ramp::RampConfig cfg = base;
    cfg.seed = s;
    ramp::RunOptions opts;
    opts.out_dir = run_dir(s);
    return ramp::run_training(cfg, opts).back().coverage_pct;
  };

  int failures = 0;
  if (!parallel) {
    for (auto s : seeds) {
      try {
        std::printf("seed %llu: final coverage %.2f%%\n", static_cast<unsigned long long>(s), run_one(s));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "seed %llu failed: %s\n", static_cast<unsigned long long>(s), e.what());
        ++failures;
      }
      std::fflush(stdout);
    }
    return failures ? 1 : 0;
  }

  unsigned limit = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RAMP_THREADS")) limit = std::max(1, std::atoi(env));
  std::vector<std::pair<pid_t, std::uint64_t>> running;
  auto reap = [&]() {
    int status = 0;
    const pid_t pid = ::wait(&status);
    auto it = std::find_if(running.begin(), running.end(), [pid](const auto& p) { return p.first == pid; });
    if (it == running.end()) return;
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    std::printf("seed %llu: %s (%s)\n", static_cast<unsigned long long>(it->second), ok ? "done" : "FAILED",
                run_dir(it->second).c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
    running.erase(it);
  };
  std::fflush(stdout);
  for (auto s : seeds) {
    while (running.size() >= limit) reap();
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      int code = 0;
      try {
        run_one(s);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "seed %llu failed: %s\n", static_cast<unsigned long long>(s), e.what());
        code = 1;
      }
      std::fflush(nullptr);
      ::_exit(code);
    }
    running.emplace_back(pid, s);
  }
  while (!running.empty()) reap();
  return failures ? 1 : 0;
}

int cmd_plotdata(const std::string& run, int epoch, const std::string& out_path) {
  const fs::path dir(run);
  const fs::path states = dir / ("states_epoch_" + std::to_string(epoch) + ".csv");
  std::ostringstream text;
  if (fs::exists(states)) {
    std::ifstream in(states, std::ios::binary);
    text << in.rdbuf();
  } else {
    const fs::path ckpt = dir / "checkpoints" / ("epoch_" + std::to_string(epoch));
    const fs::path buffer = dir / ("buffer_epoch_" + std::to_string(epoch) + ".csv");
    if (!fs::exists(ckpt / "reward.bin") || !fs::exists(buffer))
      throw std::runtime_error("no scatter data for epoch " + std::to_string(epoch) + " in " + run);
    const ramp::RampConfig cfg = ramp::load_config((ckpt / "config.json").string());
    const ramp::Mlp net = ramp::load_mlp((ckpt / "reward.bin").string());
    const double hi = std::log(1.0 / cfg.buffers.beta);
    std::ifstream in(buffer);
    std::string line;
    std::getline(in, line);
    text.precision(17);
    text << "x,y,f_phi_value\n";
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string source, tag, cell;
      std::getline(ss, source, ',');
      std::getline(ss, tag, ',');
      std::vector<double> s;
      while (std::getline(ss, cell, ',')) s.push_back(std::stod(cell));
      if (source != "rho" || s.size() < 2) continue;
      double f = net.forward(ramp::Vec(Eigen::Map<ramp::Vec>(s.data(), static_cast<Eigen::Index>(s.size()))))(0);
      if (cfg.variant == ramp::Variant::kl) f = std::clamp(f, -hi, hi);
      text << s[0] << ',' << s[1] << ',' << f << '\n';
    }
  }
  if (out_path.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAMP exploration laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, only, seeds = "0-2", run_dir, plot_out;
  std::optional<std::uint64_t> seed;
  std::uint64_t verify_seed = 7;
  bool quiet = false, parallel = false;
  int epoch = 0;

  auto* run = app.add_subcommand("run", "Train one RAMP agent");
  run->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Run directory (created if missing)");
  run->add_flag("--quiet", quiet, "No per-epoch progress on stderr");

  auto* verify = app.add_subcommand("verify", "Run the exact oracle audits");
  verify->add_option("--only", only, "Run a single audit")->check(CLI::IsMember(ramp::audit::audit_names()));
  verify->add_option("--seed", verify_seed, "Seed for random instances");

  auto* sweep = app.add_subcommand("sweep", "Run a config over several seeds");
  sweep->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "Seed list, e.g. 0-2 or 1,5,9");
  sweep->add_option("--out", out_dir, "Parent directory for the per-seed runs");
  sweep->add_flag("--parallel", parallel, "One process per seed, at most RAMP_THREADS at a time");

  auto* plot = app.add_subcommand("plotdata", "Emit the (x, y, f_phi_value) scatter of an epoch");
  plot->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--epoch", epoch, "Epoch index")->required();
  plot->add_option("--out", plot_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out_dir, quiet);
    if (*verify) return cmd_verify(only, verify_seed);
    if (*sweep) return cmd_sweep(config_path, seeds, out_dir, parallel);
    if (*plot) return cmd_plotdata(run_dir, epoch, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
