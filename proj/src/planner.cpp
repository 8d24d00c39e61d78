#include "ksrl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ksrl {

SampledLinearModel::SampledLinearModel(const FeatureMap& fm, Mat B_transition, Mat B_reward,
                                       int state_dim, RewardFunction oracle_reward)
    : fm_(fm), state_dim_(state_dim), oracle_(std::move(oracle_reward)) {
  if (B_transition.rows() != fm.dim() || B_transition.cols() != state_dim) {
    throw std::invalid_argument("transition weights must be (feature_dim x state_dim)");
  }
  if (!oracle_ && (B_reward.rows() != fm.dim() || B_reward.cols() != 1)) {
    throw std::invalid_argument("a learned reward needs (feature_dim x 1) weights");
  }
  Bt_ = B_transition.transpose();
  if (B_reward.size() > 0) br_ = B_reward.col(0);
}

double SampledLinearModel::step(std::span<const double> s, std::span<const double> a,
                                std::span<double> s_next) const {
  thread_local std::vector<double> x, z;
  const auto ds = static_cast<std::size_t>(state_dim_);
  x.resize(ds + a.size());
  z.resize(static_cast<std::size_t>(fm_.dim()));
  std::copy(s.begin(), s.end(), x.begin());
  std::copy(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(ds));
  fm_.value(x, z);
  const Eigen::Map<const Vec> zv(z.data(), static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < ds; ++i) {
    s_next[i] = s[i] + Bt_.row(static_cast<Eigen::Index>(i)).dot(zv);
  }
  return oracle_ ? oracle_(s, a) : br_.dot(zv);
}

void CEMConfig::validate() const {
  if (horizon < 1 || popsize < 1 || max_iter < 1) throw std::invalid_argument("CEM sizes must be positive");
  if (n_elites < 1 || n_elites > popsize) throw std::invalid_argument("need 1 <= n_elites <= popsize");
  if (!(init_std > 0.0)) throw std::invalid_argument("CEM init_std must be positive");
  if (action_lo.size() == 0 || action_lo.size() != action_hi.size()) {
    throw std::invalid_argument("CEM action bounds must be set per action dimension");
  }
  if (!(action_lo.array() < action_hi.array()).all()) throw std::invalid_argument("CEM needs lo < hi per dimension");
}

double rollout_return(const RolloutModel& model, const Vec& s, const Mat& sequence) {
  const auto ds = static_cast<std::size_t>(model.state_dim());
  const auto da = static_cast<std::size_t>(model.action_dim());
  std::vector<double> cur(s.data(), s.data() + s.size()), next(ds), act(da);
  double total = 0.0;
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    for (std::size_t j = 0; j < da; ++j) act[j] = sequence(t, static_cast<Eigen::Index>(j));
    total += model.step(cur, act, next);
    std::swap(cur, next);
  }
  return total;
}

std::vector<double> evaluate_population(const RolloutModel& model, const Vec& s,
                                        const std::vector<Mat>& population) {
  std::vector<double> returns(population.size());
  const auto n = static_cast<std::ptrdiff_t>(population.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    returns[static_cast<std::size_t>(p)] = rollout_return(model, s, population[static_cast<std::size_t>(p)]);
  }
  return returns;
}

CemPlanner::CemPlanner(CEMConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  reset();
}

void CemPlanner::reset() {
  const Vec mid = 0.5 * (cfg_.action_lo + cfg_.action_hi);
  mean_ = mid.transpose().replicate(cfg_.horizon, 1);
}

void CemPlanner::set_warm_start(Mat mean) {
  if (mean.rows() != cfg_.horizon || mean.cols() != cfg_.action_lo.size()) {
    throw std::invalid_argument("warm start must be horizon x action_dim");
  }
  mean_ = std::move(mean);
}

PlanResult CemPlanner::plan(const Vec& s, const RolloutModel& model, Rng& rng) {
  if (!s.allFinite()) throw std::invalid_argument("planner state has non-finite entries");
  const int H = cfg_.horizon;
  const auto da = cfg_.action_lo.size();
  if (model.action_dim() != da || model.state_dim() != s.size()) {
    throw std::invalid_argument("rollout model does not match planner dimensions");
  }
  constexpr double kStdFloor = 1e-6;

  Mat mean = mean_;
  Mat stdev = Mat::Constant(H, da, cfg_.init_std);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Mat> population(static_cast<std::size_t>(cfg_.popsize), Mat(H, da));

  PlanResult result;
  result.expected_return = -std::numeric_limits<double>::infinity();
  result.sequence = mean;

  std::vector<std::size_t> order(population.size());
  for (int iter = 0; iter < cfg_.max_iter; ++iter) {
    for (auto& cand : population) {
      for (int t = 0; t < H; ++t) {
        for (Eigen::Index j = 0; j < da; ++j) {
          const double v = mean(t, j) + stdev(t, j) * normal(rng);
          cand(t, j) = std::clamp(v, cfg_.action_lo[j], cfg_.action_hi[j]);
        }
      }
    }
    std::vector<double> returns = evaluate_population(model, s, population);
    // A diverging rollout under a sampled model ranks last instead of poisoning the sort.
    for (double& r : returns) {
      if (std::isnan(r)) r = -std::numeric_limits<double>::infinity();
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return returns[a] > returns[b]; });

    if (returns[order[0]] > result.expected_return) {
      result.expected_return = returns[order[0]];
      result.sequence = population[order[0]];
    }
    result.best_by_iteration.push_back(result.expected_return);

    mean.setZero();
    for (int e = 0; e < cfg_.n_elites; ++e) mean += population[order[static_cast<std::size_t>(e)]];
    mean /= cfg_.n_elites;
    Mat var = Mat::Zero(H, da);
    for (int e = 0; e < cfg_.n_elites; ++e) {
      var += (population[order[static_cast<std::size_t>(e)]] - mean).array().square().matrix();
    }
    stdev = (var / cfg_.n_elites).array().sqrt().max(kStdFloor).matrix();
  }

  result.action = result.sequence.row(0).transpose();

  // Shift the final sampling mean one step for the next call.
  if (H > 1) mean_.topRows(H - 1) = mean.bottomRows(H - 1);
  mean_.row(H - 1) = 0.5 * (cfg_.action_lo + cfg_.action_hi).transpose();
  return result;
}

}  // namespace ksrl
