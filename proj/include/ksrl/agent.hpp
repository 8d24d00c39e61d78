#pragma once

#include "ksrl/coreset.hpp"
#include "ksrl/envs.hpp"
#include "ksrl/metrics.hpp"
#include "ksrl/model.hpp"
#include "ksrl/planner.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace ksrl {

enum class Algorithm { KSRL, PSRL };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct AgentConfig {
  Algorithm algorithm = Algorithm::KSRL;
  double alpha = 0.5;
  int episodes = 10;
  std::uint64_t seed = 0;
  EnvSpec env = default_spec(EnvName::PendulumSwingUp);
  CEMConfig cem;
  BaseKernelConfig kernel;
  /// Recompute the base-kernel lengthscale from the dictionary every episode.
  bool median_lengthscale = true;
  ScoreKind score = ScoreKind::Model;
  FeatureKind feature_kind = FeatureKind::RandomFourier;
  int features = 64;
  double feature_bandwidth = 1.0;
  double prior_var = 1.0;
  double noise_var = 0.01;
  double target_jitter = 1e-6;
  /// KSRL only. When false the thinning call runs with eps = 0 and floor = |dictionary|,
  /// which removes nothing.
  bool thinning = true;
  /// When > 0, each episode's transitions are split into this many batches and only the
  /// KSD-optimal point of each batch is admitted before thinning.
  int spmcmc_batches = 0;

  void validate() const;
};

/// Per-environment defaults (pendulum: popsize 100, 5 elites, horizon 20;
/// cartpole: popsize 500, 50 elites, horizon 30; 5 CEM iterations).
AgentConfig default_config(EnvName env, Algorithm algo = Algorithm::KSRL);

struct EpisodeOutcome {
  std::vector<Particle> trajectory;
  MetricsRecord metrics;
  AuditRecord audit;
  /// Non-empty when the episode was cut short by an environment error.
  std::string abort_reason;
};

/// Posterior-sampling agent. Episode 1 acts uniformly at random to seed the dictionary;
/// every later episode samples one model from the posterior, plans with CEM-MPC under it,
/// appends the transitions, and (KSRL) thins the dictionary with budget eps_k and floor f(k).
class Agent {
 public:
  explicit Agent(AgentConfig cfg);

  /// Runs the next episode; k must equal episodes_done() + 1.
  EpisodeOutcome run_episode(int k);

  int episodes_done() const { return episodes_done_; }
  const std::vector<Particle>& dictionary() const { return dictionary_; }
  const std::vector<int>& dictionary_episodes() const { return episode_tags_; }
  const GaussianLinearPosterior& transition_posterior() const { return post_transition_; }
  const GaussianLinearPosterior& reward_posterior() const { return post_reward_; }
  const FeatureMap& feature_map() const { return fm_; }
  const AgentConfig& config() const { return cfg_; }
  const Environment& environment() const { return *env_; }

  /// Exact text snapshot of everything the next episode depends on.
  void save_checkpoint(std::ostream& os) const;
  void load_checkpoint(std::istream& is);

 private:
  void refit_posteriors();
  Coreset build_coreset(double& lengthscale) const;

  AgentConfig cfg_;
  std::unique_ptr<Environment> env_;
  FeatureMap fm_;
  GaussianLinearPosterior post_transition_;
  GaussianLinearPosterior post_reward_;
  CemPlanner planner_;
  Rng rng_;
  std::vector<Particle> dictionary_;
  std::vector<int> episode_tags_;
  int episodes_done_ = 0;
  long steps_ = 0;
};

struct RunOptions {
  /// Continue from the checkpoint in the run directory if one exists.
  bool resume = false;
  /// Write measured seconds into metrics.csv's wall_s column. Off by default so the file
  /// stays a pure function of (config, seed); timing.csv always has the measurement.
  bool record_wall_clock = false;
  bool write_trajectories = true;
  /// Stop after this many episodes in this invocation (0 = no limit); used to test resume.
  int max_new_episodes = 0;
};

struct RunSummary {
  std::vector<MetricsRecord> metrics;
  std::vector<AuditRecord> audits;
  int resumed_from = 0;
};

/// Runs the configured number of episodes into `out_dir`: config.txt, metrics.csv,
/// audit.jsonl, timing.csv, trajectories.csv, metadata.json, plot_metrics.py, checkpoint.txt.
RunSummary run(const AgentConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opts = {});

}  // namespace ksrl
