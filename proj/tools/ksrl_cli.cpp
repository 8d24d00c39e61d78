#include "ksrl/agent.hpp"
#include "ksrl/analyze.hpp"
#include "ksrl/checks.hpp"
#include "ksrl/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

// Flags that map one-to-one onto config keys. Values stay strings until apply_config.
const std::vector<std::pair<std::string, std::string>> kRunKeys = {
    {"env", "pendulum|cartpole"},
    {"algo", "ksrl|psrl"},
    {"alpha", "compression exponent in [0, 1]"},
    {"episodes", "number of episodes"},
    {"seed", "RNG seed"},
    {"kernel", "imq|rbf"},
    {"lengthscale", "median or a positive number"},
    {"imq-offset", "IMQ offset c"},
    {"imq-exponent", "IMQ exponent beta in (-1, 0)"},
    {"score", "model|gaussfit"},
    {"oracle-rewards", "plan with the true reward function"},
    {"features", "number of random features"},
    {"feature-kind", "rff|poly"},
    {"feature-bandwidth", "random feature bandwidth"},
    {"prior-var", "weight prior variance"},
    {"noise-var", "observation noise variance"},
    {"noise-std", "environment noise std"},
    {"horizon", "steps per episode"},
    {"jitter", "covariance jitter for the Stein target"},
    {"thinning", "run KSD thinning (ksrl only)"},
    {"spmcmc-batches", "SPMCMC admission batches per episode (0 = off)"},
    {"popsize", "CEM population"},
    {"elites", "CEM elites"},
    {"plan-horizon", "CEM planning horizon"},
    {"max-iter", "CEM iterations"},
    {"init-std", "CEM initial std"},
};

int cmd_run(const std::map<std::string, std::string>& flags, const std::string& config_file,
            const std::string& out, bool resume, bool wall_clock, const CLI::App& sub) {
  ksrl::KeyValues kv;
  if (!config_file.empty()) kv = ksrl::read_config_file(config_file);
  for (const auto& [k, v] : flags) kv[k] = v;
  if (!kv.count("env")) {
    std::cerr << "error: --env is required\n\n" << sub.help();
    return 2;
  }
  std::string out_dir = out;
  if (out_dir.empty() && kv.count("out")) out_dir = kv.at("out");
  if (out_dir.empty()) {
    std::cerr << "error: --out is required\n\n" << sub.help();
    return 2;
  }
  ksrl::AgentConfig cfg = ksrl::apply_config(ksrl::default_config(ksrl::EnvName::PendulumSwingUp), kv);
  cfg.validate();
  ksrl::RunOptions opts;
  opts.resume = resume;
  opts.record_wall_clock = wall_clock;
  const auto summary = ksrl::run(cfg, out_dir, opts);
  if (summary.resumed_from > 0) std::cout << "resumed after episode " << summary.resumed_from << "\n";
  for (const auto& m : summary.metrics) {
    std::cout << "episode " << m.episode << " return " << m.episode_return << " |D| " << m.dict_size
              << " ksd " << m.ksd << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior-sampling RL with KSD-thinned dictionaries"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment into an output directory");
  std::map<std::string, std::string> values;
  for (const auto& [key, help] : kRunKeys) run->add_option("--" + key, values[key], help);
  std::string config_file, out;
  bool resume = false, wall_clock = false;
  run->add_option("--config", config_file, "key = value file; flags override it")->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_flag("--resume", resume, "continue from checkpoint.txt in --out");
  run->add_flag("--record-wall-clock", wall_clock, "write measured seconds into metrics.csv");

  auto* check = app.add_subcommand("check", "Run the invariant suite");
  bool quick = false, fault = false;
  check->add_flag("--quick", quick, "reduced sample counts");
  check->add_flag("--inject-fault", fault, "flip a sign in the Stein kernel");

  auto* an = app.add_subcommand("analyze", "Summarise completed runs");
  std::vector<std::string> dirs;
  ksrl::AnalyzeOptions aopts;
  an->add_option("dirs", dirs, "run directories")->required()->check(CLI::ExistingDirectory);
  an->add_option("--k-min", aopts.k_min, "first episode used in exponent fits");
  an->add_option("--window", aopts.window, "episodes in the final-return window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      std::map<std::string, std::string> given;
      for (const auto& [key, help] : kRunKeys) {
        if (run->count("--" + key) > 0) given[key] = values[key];
      }
      return cmd_run(given, config_file, out, resume, wall_clock, *run);
    }
    if (*check) {
      ksrl::CheckOptions copts;
      copts.quick = quick;
      copts.inject_fault = fault;
      bool ok = true;
      for (const auto& r : ksrl::run_invariant_checks(copts)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    if (*an) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      std::cout << ksrl::format_report(ksrl::analyze(paths, aopts));
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
