#pragma once

#include "ksrl/model.hpp"

#include <functional>
#include <span>

namespace ksrl {

/// Deterministic one-step model used by planner rollouts. Implementations must be safe to
/// call concurrently.
class RolloutModel {
 public:
  virtual ~RolloutModel() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Writes the predicted next state and returns the predicted reward r(s, a).
  virtual double step(std::span<const double> s, std::span<const double> a,
                      std::span<double> s_next) const = 0;
};

using RewardFunction = std::function<double(std::span<const double> s, std::span<const double> a)>;

/// Mean dynamics of one sampled linear model. When `oracle_reward` is set it replaces the
/// learned reward head.
class SampledLinearModel final : public RolloutModel {
 public:
  SampledLinearModel(const FeatureMap& fm, Mat B_transition, Mat B_reward, int state_dim,
                     RewardFunction oracle_reward = {});

  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return fm_.input_dim() - state_dim_; }
  double step(std::span<const double> s, std::span<const double> a,
              std::span<double> s_next) const override;

 private:
  FeatureMap fm_;
  Mat Bt_;  // transposed transition weights, state_dim x m
  Vec br_;
  int state_dim_;
  RewardFunction oracle_;
};

struct CEMConfig {
  int horizon = 20;
  int popsize = 100;
  int n_elites = 5;
  int max_iter = 5;
  double init_std = 1.0;
  Vec action_lo;
  Vec action_hi;

  void validate() const;
};

struct PlanResult {
  Vec action;
  /// horizon x action_dim, best-ever sequence
  Mat sequence;
  double expected_return = 0.0;
  /// Best-ever elite return after each iteration.
  std::vector<double> best_by_iteration;
};

/// Sum of predicted rewards along `sequence` (horizon x action_dim) from state s.
double rollout_return(const RolloutModel& model, const Vec& s, const Mat& sequence);

/// Rollout returns for a whole population, OpenMP-parallel over candidates.
std::vector<double> evaluate_population(const RolloutModel& model, const Vec& s,
                                        const std::vector<Mat>& population);

/// Cross-entropy-method MPC with elitist retention and a shifted warm start.
class CemPlanner {
 public:
  CemPlanner() = default;
  explicit CemPlanner(CEMConfig cfg);

  PlanResult plan(const Vec& s, const RolloutModel& model, Rng& rng);
  void reset();

  const CEMConfig& config() const { return cfg_; }
  const Mat& warm_start() const { return mean_; }
  void set_warm_start(Mat mean);

 private:
  CEMConfig cfg_;
  Mat mean_;  // horizon x action_dim
};

}  // namespace ksrl
