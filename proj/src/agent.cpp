#include "ksrl/agent.hpp"

#include "ksrl/config.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ksrl {

std::string to_string(Algorithm a) { return a == Algorithm::KSRL ? "ksrl" : "psrl"; }

Algorithm parse_algorithm(const std::string& s) {
  if (s == "ksrl") return Algorithm::KSRL;
  if (s == "psrl") return Algorithm::PSRL;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected ksrl or psrl)");
}

void AgentConfig::validate() const {
  if (algorithm == Algorithm::KSRL && !(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1] for ksrl");
  }
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (features < 1) throw std::invalid_argument("feature dimension must be positive");
  if (!(feature_bandwidth > 0.0)) throw std::invalid_argument("feature bandwidth must be positive");
  if (!(prior_var > 0.0) || !(noise_var > 0.0)) throw std::invalid_argument("variances must be positive");
  if (spmcmc_batches < 0 || spmcmc_batches > env.horizon) {
    throw std::invalid_argument("spmcmc batches must lie in [0, horizon]");
  }
  if (env.action_lo.size() != env.action_dim || env.action_hi.size() != env.action_dim) {
    throw std::invalid_argument("environment action bounds do not match action_dim");
  }
  kernel.validate();
  cem.validate();
}

AgentConfig default_config(EnvName env, Algorithm algo) {
  AgentConfig cfg;
  cfg.algorithm = algo;
  cfg.env = default_spec(env);
  cfg.cem.action_lo = cfg.env.action_lo;
  cfg.cem.action_hi = cfg.env.action_hi;
  cfg.cem.max_iter = 5;
  cfg.cem.init_std = 0.5 * (cfg.env.action_hi - cfg.env.action_lo).maxCoeff() / 2.0;
  if (env == EnvName::PendulumSwingUp) {
    cfg.cem.popsize = 100;
    cfg.cem.n_elites = 5;
    cfg.cem.horizon = 20;
  } else {
    cfg.cem.popsize = 500;
    cfg.cem.n_elites = 50;
    cfg.cem.horizon = 30;
  }
  return cfg;
}

namespace {

// Independent streams for the feature map and for the acting loop.
constexpr std::uint64_t kFeatureSeedSalt = 0x9e3779b97f4a7c15ULL;

FeatureMap make_feature_map(const AgentConfig& cfg) {
  const int input_dim = cfg.env.state_dim + cfg.env.action_dim;
  if (cfg.feature_kind == FeatureKind::Polynomial) return FeatureMap::polynomial(input_dim);
  return FeatureMap::random_fourier(input_dim, cfg.features, cfg.feature_bandwidth,
                                    cfg.seed ^ kFeatureSeedSalt, cfg.env.input_scale);
}

}  // namespace

Agent::Agent(AgentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  env_ = make_environment(cfg_.env);
  fm_ = make_feature_map(cfg_);
  post_transition_ = GaussianLinearPosterior(fm_.dim(), cfg_.env.state_dim, cfg_.prior_var, cfg_.noise_var);
  post_reward_ = GaussianLinearPosterior(fm_.dim(), 1, cfg_.prior_var, cfg_.noise_var);
  planner_ = CemPlanner(cfg_.cem);
  rng_.seed(cfg_.seed);
}

void Agent::refit_posteriors() {
  post_transition_ = GaussianLinearPosterior(fm_.dim(), cfg_.env.state_dim, cfg_.prior_var, cfg_.noise_var);
  post_reward_ = GaussianLinearPosterior(fm_.dim(), 1, cfg_.prior_var, cfg_.noise_var);
  if (dictionary_.empty()) return;
  const Mat Z = design_matrix(dictionary_, fm_);
  const auto n = static_cast<Eigen::Index>(dictionary_.size());
  Mat deltas(n, cfg_.env.state_dim);
  Mat rewards(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Particle& p = dictionary_[static_cast<std::size_t>(i)];
    deltas.row(i) = (p.s_next - p.s).transpose();
    rewards(i, 0) = p.r;
  }
  post_transition_.update(Z, deltas);
  post_reward_.update(Z, rewards);
}

Coreset Agent::build_coreset(double& lengthscale) const {
  const RowMat points = flatten_particles(dictionary_);
  SteinTarget target = cfg_.score == ScoreKind::Model
                           ? SteinTarget::model(points, cfg_.env.state_dim, cfg_.env.action_dim, fm_,
                                                post_transition_.mean(), cfg_.noise_var, cfg_.target_jitter)
                           : SteinTarget::gaussian_fit(points, cfg_.target_jitter);
  BaseKernelConfig kernel = cfg_.kernel;
  if (cfg_.median_lengthscale) kernel.lengthscale = median_lengthscale(points);
  lengthscale = kernel.lengthscale;
  std::vector<std::size_t> ids(dictionary_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return Coreset(points, target.scores(points), kernel, std::move(ids), episode_tags_);
}

EpisodeOutcome Agent::run_episode(int k) {
  if (k != episodes_done_ + 1) throw std::invalid_argument("episodes must run in order");
  const auto t0 = std::chrono::steady_clock::now();
  const EnvSpec& spec = cfg_.env;
  EpisodeOutcome out;

  std::unique_ptr<SampledLinearModel> model;
  const bool random_actions = dictionary_.empty();
  if (!random_actions) {
    Mat B_t = post_transition_.sample(rng_);
    Mat B_r = spec.oracle_rewards ? Mat() : post_reward_.sample(rng_);
    model = std::make_unique<SampledLinearModel>(fm_, std::move(B_t), std::move(B_r), spec.state_dim,
                                                 spec.oracle_rewards ? env_->reward_function() : RewardFunction{});
    planner_.reset();
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec s = env_->reset(rng_);
  double episode_return = 0.0;
  try {
    for (int i = 0; i < spec.horizon; ++i) {
      Vec a(spec.action_dim);
      if (random_actions) {
        for (int j = 0; j < spec.action_dim; ++j) {
          a[j] = spec.action_lo[j] + (spec.action_hi[j] - spec.action_lo[j]) * unit(rng_);
        }
      } else {
        a = planner_.plan(s, *model, rng_).action;
      }
      StepResult st = env_->step(s, a, i, rng_);
      out.trajectory.push_back(Particle{s, a.cwiseMax(spec.action_lo).cwiseMin(spec.action_hi), st.next_state, st.reward});
      episode_return += st.reward;
      s = std::move(st.next_state);
    }
  } catch (const std::runtime_error& e) {
    out.abort_reason = e.what();
  }

  // D~ = D u C, optionally admitting only the KSD-optimal point of each batch.
  std::vector<Particle> admitted = out.trajectory;
  if (cfg_.spmcmc_batches > 0 && !admitted.empty() && !dictionary_.empty()) {
    std::vector<Particle> merged = dictionary_;
    merged.insert(merged.end(), admitted.begin(), admitted.end());
    const RowMat all = flatten_particles(merged);
    const SteinTarget target = SteinTarget::model(all, spec.state_dim, spec.action_dim, fm_,
                                                  post_transition_.mean(), cfg_.noise_var, cfg_.target_jitter);
    BaseKernelConfig kernel = cfg_.kernel;
    if (cfg_.median_lengthscale) kernel.lengthscale = median_lengthscale(all);
    const RowMat old_points = flatten_particles(dictionary_);
    Coreset current(old_points, target.scores(old_points), kernel);
    const RowMat fresh = flatten_particles(admitted);
    const RowMat fresh_scores = target.scores(fresh);
    const auto n = static_cast<Eigen::Index>(admitted.size());
    const Eigen::Index batches = std::min<Eigen::Index>(cfg_.spmcmc_batches, n);
    std::vector<Particle> chosen;
    for (Eigen::Index b = 0; b < batches; ++b) {
      const Eigen::Index lo = b * n / batches, hi = (b + 1) * n / batches;
      const std::size_t pick = spmcmc_select(fresh.middleRows(lo, hi - lo), fresh_scores.middleRows(lo, hi - lo), current);
      chosen.push_back(admitted[static_cast<std::size_t>(lo) + pick]);
    }
    admitted = std::move(chosen);
  }
  for (auto& p : admitted) {
    dictionary_.push_back(std::move(p));
    episode_tags_.push_back(k);
  }
  refit_posteriors();

  AuditRecord audit;
  audit.k = k;
  audit.size_pre = static_cast<long>(dictionary_.size());
  double eps = 0.0;
  double ksd2_post = 0.0;
  if (!dictionary_.empty()) {
    Coreset coreset = build_coreset(audit.lengthscale);
    audit.ksd2_pre = coreset.ksd2();
    if (cfg_.algorithm == Algorithm::KSRL) {
      const BudgetSchedule sched{cfg_.alpha, spec.horizon};
      long floor = size_floor(sched, k);
      eps = epsilon_k(sched, k);
      if (!cfg_.thinning) {
        eps = 0.0;
        floor = static_cast<long>(coreset.size());
      }
      audit.floor = floor;
      const ThinReport rep = ksd_thin(coreset, eps, floor);
      audit.removed = static_cast<long>(rep.removed);
      if (rep.removed > 0) {
        std::vector<Particle> kept;
        std::vector<int> kept_tags;
        kept.reserve(coreset.size());
        for (std::size_t id : coreset.ids()) {
          kept.push_back(std::move(dictionary_[id]));
          kept_tags.push_back(episode_tags_[id]);
        }
        dictionary_ = std::move(kept);
        episode_tags_ = std::move(kept_tags);
      }
    }
    ksd2_post = coreset.ksd2();
    audit.ksd2_post = ksd2_post;
    audit.eps = eps;
    // Refit on the (possibly) compressed dictionary; PSRL takes the same path so the two
    // algorithms coincide bit-for-bit when nothing is removed.
    refit_posteriors();
  }

  episodes_done_ = k;
  steps_ += spec.horizon;

  MetricsRecord& m = out.metrics;
  m.episode = k;
  m.steps = steps_;
  m.episode_return = episode_return;
  m.dict_size = static_cast<long>(dictionary_.size());
  m.ksd = std::sqrt(std::max(0.0, ksd2_post));
  m.epsilon = eps;
  m.post_var_trace = post_transition_.covariance_trace();
  m.seed = cfg_.seed;
  m.algo = to_string(cfg_.algorithm);
  m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.audit = audit;
  return out;
}

void Agent::save_checkpoint(std::ostream& os) const {
  os << "ksrl-checkpoint 1\n";
  os << episodes_done_ << ' ' << steps_ << '\n';
  os << rng_ << '\n';
  os << dictionary_.size() << '\n';
  os << std::hexfloat;
  for (std::size_t i = 0; i < dictionary_.size(); ++i) {
    const Particle& p = dictionary_[i];
    os << episode_tags_[i];
    for (double v : p.s) os << ' ' << v;
    for (double v : p.a) os << ' ' << v;
    for (double v : p.s_next) os << ' ' << v;
    os << ' ' << p.r << '\n';
  }
  os << std::defaultfloat;
}

namespace {

double read_hex_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("checkpoint truncated");
  return std::strtod(tok.c_str(), nullptr);
}

}  // namespace

void Agent::load_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "ksrl-checkpoint" || version != 1) {
    throw std::runtime_error("not a checkpoint file");
  }
  std::size_t n = 0;
  if (!(is >> episodes_done_ >> steps_ >> rng_ >> n)) throw std::runtime_error("checkpoint header is corrupt");
  const int ds = cfg_.env.state_dim, da = cfg_.env.action_dim;
  dictionary_.assign(n, Particle{});
  episode_tags_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Particle& p = dictionary_[i];
    if (!(is >> episode_tags_[i])) throw std::runtime_error("checkpoint truncated");
    p.s.resize(ds);
    p.a.resize(da);
    p.s_next.resize(ds);
    for (int j = 0; j < ds; ++j) p.s[j] = read_hex_double(is);
    for (int j = 0; j < da; ++j) p.a[j] = read_hex_double(is);
    for (int j = 0; j < ds; ++j) p.s_next[j] = read_hex_double(is);
    p.r = read_hex_double(is);
  }
  refit_posteriors();
}

// ---- run directory ----------------------------------------------------------

namespace {

const char* kPlotScript = R"(#!/usr/bin/env python3
# Plots the per-episode metrics of one or more run directories.
# usage: python3 plot_metrics.py RUN_DIR [RUN_DIR ...]
import csv, os, sys
import matplotlib.pyplot as plt

panels = [("return", "episode return"), ("dict_size", "dictionary size"),
          ("ksd", "KSD"), ("post_var_trace", "posterior variance trace")]
fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.2))
for run in sys.argv[1:] or ["."]:
    with open(os.path.join(run, "metrics.csv")) as f:
        rows = list(csv.DictReader(f))
    steps = [int(r["steps"]) for r in rows]
    label = "%s seed %s" % (rows[0]["algo"], rows[0]["seed"]) if rows else run
    for ax, (key, title) in zip(axes, panels):
        ax.plot(steps, [float(r[key]) for r in rows], label=label)
        ax.set_title(title)
        ax.set_xlabel("steps")
for ax in axes[2:]:
    ax.set_yscale("log")
axes[0].legend(fontsize=7)
fig.tight_layout()
fig.savefig("metrics.png", dpi=120)
)";

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines, std::size_t count) {
  std::ofstream out(p, std::ios::trunc);
  for (std::size_t i = 0; i < count && i < lines.size(); ++i) out << lines[i] << '\n';
}

std::ofstream open_append(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::app);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_metadata(const AgentConfig& cfg, const std::filesystem::path& dir, const Agent& agent,
                    const std::vector<AuditRecord>& audits) {
  nlohmann::ordered_json meta;
  meta["git_hash"] = KSRL_GIT_HASH;
  meta["env"] = to_string(cfg.env.name);
  meta["algo"] = to_string(cfg.algorithm);
  meta["score"] = cfg.score == ScoreKind::Model ? "model" : "gaussfit";
  meta["kernel"] = cfg.kernel.kind == KernelKind::IMQ ? "imq" : "rbf";
  meta["imq_offset"] = cfg.kernel.imq_offset;
  meta["imq_exponent"] = cfg.kernel.imq_exponent;
  meta["median_lengthscale"] = cfg.median_lengthscale;
  meta["feature_dim"] = agent.feature_map().dim();
  std::vector<double> ls;
  for (const auto& a : audits) ls.push_back(a.lengthscale);
  meta["lengthscale_per_episode"] = ls;
  nlohmann::ordered_json c;
  if (cfg.env.name == EnvName::PendulumSwingUp) {
    namespace p = constants::pendulum;
    c = {{"gravity", p::kGravity}, {"mass", p::kMass}, {"length", p::kLength}, {"dt", p::kDt},
         {"max_speed", p::kMaxSpeed}, {"max_torque", p::kMaxTorque}, {"init_angle_spread", p::kInitAngleSpread}};
  } else {
    namespace p = constants::cartpole;
    c = {{"gravity", p::kGravity}, {"mass_cart", p::kMassCart}, {"mass_pole", p::kMassPole},
         {"half_length", p::kHalfLength}, {"force_mag", p::kForceMag}, {"dt", p::kDt},
         {"theta_threshold", p::kThetaThreshold}, {"x_threshold", p::kXThreshold}, {"init_spread", p::kInitSpread}};
  }
  c["noise_std"] = cfg.env.noise_std;
  c["horizon"] = cfg.env.horizon;
  meta["constants"] = c;
  std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
}

}  // namespace

RunSummary run(const AgentConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opts) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(out_dir);
  const fs::path metrics_path = out_dir / "metrics.csv";
  const fs::path audit_path = out_dir / "audit.jsonl";
  const fs::path timing_path = out_dir / "timing.csv";
  const fs::path traj_path = out_dir / "trajectories.csv";
  const fs::path ckpt_path = out_dir / "checkpoint.txt";
  const fs::path config_path = out_dir / "config.txt";

  Agent agent(cfg);
  RunSummary summary;

  const std::string config_text = format_config(cfg);
  bool resumed = false;
  if (opts.resume && fs::exists(ckpt_path) && fs::exists(metrics_path)) {
    std::ifstream cin(config_path);
    std::stringstream prev;
    prev << cin.rdbuf();
    if (prev.str() != config_text) throw std::runtime_error("cannot resume: config differs from " + config_path.string());
    std::ifstream ck(ckpt_path);
    agent.load_checkpoint(ck);
    const auto done = static_cast<std::size_t>(agent.episodes_done());
    // Drop anything written after the checkpoint.
    write_lines(metrics_path, read_lines(metrics_path), done + 1);
    write_lines(audit_path, read_lines(audit_path), done);
    write_lines(timing_path, read_lines(timing_path), done + 1);
    if (fs::exists(traj_path)) {
      auto lines = read_lines(traj_path);
      std::size_t keep = 1;
      while (keep < lines.size() && std::stoi(lines[keep].substr(0, lines[keep].find(','))) <= static_cast<int>(done)) ++keep;
      write_lines(traj_path, lines, keep);
    }
    summary.metrics = read_metrics_csv(metrics_path);
    summary.audits = read_audit_jsonl(audit_path);
    summary.resumed_from = agent.episodes_done();
    resumed = true;
  }
  if (!resumed) {
    std::ofstream(config_path) << config_text;
    std::ofstream(metrics_path) << kMetricsHeader << '\n';
    std::ofstream(audit_path, std::ios::trunc);
    std::ofstream(timing_path) << "episode,wall_s\n";
    if (opts.write_trajectories) {
      std::ofstream tf(traj_path);
      tf << "episode,step";
      for (int j = 0; j < cfg.env.state_dim; ++j) tf << ",s" << j;
      for (int j = 0; j < cfg.env.action_dim; ++j) tf << ",a" << j;
      tf << ",r\n";
    } else {
      fs::remove(traj_path);
    }
    std::ofstream(out_dir / "plot_metrics.py") << kPlotScript;
    fs::remove(ckpt_path);
  }

  int ran = 0;
  for (int k = agent.episodes_done() + 1; k <= cfg.episodes; ++k) {
    if (opts.max_new_episodes > 0 && ran >= opts.max_new_episodes) break;
    EpisodeOutcome ep = agent.run_episode(k);
    const double measured = ep.metrics.wall_s;
    if (!opts.record_wall_clock) ep.metrics.wall_s = 0.0;
    open_append(metrics_path) << format_metrics_row(ep.metrics) << '\n';
    open_append(audit_path) << format_audit_line(ep.audit) << '\n';
    open_append(timing_path) << k << ',' << format_double(measured) << '\n';
    if (opts.write_trajectories) {
      auto tf = open_append(traj_path);
      for (std::size_t i = 0; i < ep.trajectory.size(); ++i) {
        const Particle& p = ep.trajectory[i];
        tf << k << ',' << i;
        for (double v : p.s) tf << ',' << format_double(v);
        for (double v : p.a) tf << ',' << format_double(v);
        tf << ',' << format_double(p.r) << '\n';
      }
    }
    if (!ep.abort_reason.empty()) {
      open_append(out_dir / "aborts.log") << "episode " << k << ": " << ep.abort_reason << '\n';
    }
    {
      const fs::path tmp = out_dir / "checkpoint.txt.tmp";
      {
        std::ofstream ck(tmp, std::ios::trunc);
        agent.save_checkpoint(ck);
      }
      fs::rename(tmp, ckpt_path);
    }
    summary.metrics.push_back(ep.metrics);
    summary.audits.push_back(ep.audit);
    ++ran;
  }
  write_metadata(cfg, out_dir, agent, summary.audits);
  return summary;
}

}  // namespace ksrl
