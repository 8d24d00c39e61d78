#include "ksrl/planner.hpp"
#include "ksrl/reference.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ksrl;

namespace {

/// Reward depends only on the action: r = -sum_j (a_j - target_j)^2, state is constant.
class Quadratic final : public RolloutModel {
 public:
  explicit Quadratic(Vec target) : target_(std::move(target)) {}
  int state_dim() const override { return 1; }
  int action_dim() const override { return static_cast<int>(target_.size()); }
  double step(std::span<const double> s, std::span<const double> a, std::span<double> s_next) const override {
    s_next[0] = s[0];
    double r = 0;
    for (std::size_t j = 0; j < a.size(); ++j) r -= (a[j] - target_[static_cast<Eigen::Index>(j)]) * (a[j] - target_[static_cast<Eigen::Index>(j)]);
    return r;
  }

 private:
  Vec target_;
};

/// Integrator s' = s + a with reward -1 - (s' - 0.5)^2, so later steps depend on earlier actions.
class Integrator final : public RolloutModel {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  double step(std::span<const double> s, std::span<const double> a, std::span<double> s_next) const override {
    s_next[0] = s[0] + a[0];
    return -1.0 - (s[0] + a[0] - 0.5) * (s[0] + a[0] - 0.5);
  }
};

CEMConfig config(int horizon, int pop, int elites, int iters, int da = 1) {
  CEMConfig c;
  c.horizon = horizon;
  c.popsize = pop;
  c.n_elites = elites;
  c.max_iter = iters;
  c.init_std = 0.5;
  c.action_lo = Vec::Constant(da, -1.0);
  c.action_hi = Vec::Constant(da, 1.0);
  return c;
}

}  // namespace

TEST(Cem, RecoversQuadraticArgmax) {
  CemPlanner p(config(1, 100, 10, 5));
  Rng rng(1);
  const auto r = p.plan(Vec::Zero(1), Quadratic(Vec::Constant(1, 0.3)), rng);
  EXPECT_NEAR(r.action[0], 0.3, 0.05);
}

TEST(Cem, ExpectedReturnNearGridOptimum) {
  for (int tau = 1; tau <= 3; ++tau) {
    CemPlanner p(config(tau, 200, 20, 8));
    Rng rng(2 + tau);
    const auto res = p.plan(Vec::Zero(1), Integrator{}, rng);
    const double best = oracle::grid_max(
        [&](const Vec& seq) { return rollout_return(Integrator{}, Vec::Zero(1), Mat(seq)); }, tau, -1.0, 1.0, 0.01);
    EXPECT_LE(std::abs(res.expected_return - best), 0.05 * std::abs(best)) << "tau " << tau;
  }
}

TEST(Cem, BestByIterationNondecreasingAndActionsInBounds) {
  CemPlanner p(config(5, 30, 3, 6, 2));
  Rng rng(4);
  Vec target(2);
  target << 1.7, -3.0;  // outside the bounds, so clipping is active
  const auto r = p.plan(Vec::Zero(1), Quadratic(target), rng);
  ASSERT_EQ(r.best_by_iteration.size(), 6u);
  for (std::size_t i = 1; i < r.best_by_iteration.size(); ++i) EXPECT_GE(r.best_by_iteration[i], r.best_by_iteration[i - 1]);
  EXPECT_TRUE((r.sequence.array() >= -1.0).all() && (r.sequence.array() <= 1.0).all());
  EXPECT_DOUBLE_EQ(r.expected_return, rollout_return(Quadratic(target), Vec::Zero(1), r.sequence));
}

TEST(Cem, FixedSeedSameAction) {
  CemPlanner a(config(4, 50, 5, 3)), b(config(4, 50, 5, 3));
  Rng ra(5), rb(5);
  EXPECT_EQ(a.plan(Vec::Zero(1), Integrator{}, ra).action, b.plan(Vec::Zero(1), Integrator{}, rb).action);
}

TEST(Cem, AllElitesMeanIsPopulationMean) {
  const int H = 3, pop = 7;
  CemPlanner p(config(H, pop, pop, 1));
  Rng rng(6), replay(6);
  p.plan(Vec::Zero(1), Integrator{}, rng);
  // Replay the sampling order: candidates in turn, each row-major over (t, j).
  std::normal_distribution<double> z;
  Mat mean = Mat::Zero(H, 1);
  for (int c = 0; c < pop; ++c)
    for (int t = 0; t < H; ++t) mean(t, 0) += std::clamp(0.0 + 0.5 * z(replay), -1.0, 1.0);
  mean /= pop;
  EXPECT_NEAR(p.warm_start()(0, 0), mean(1, 0), 1e-15);
  EXPECT_NEAR(p.warm_start()(1, 0), mean(2, 0), 1e-15);
  EXPECT_EQ(p.warm_start()(2, 0), 0.0);
}

TEST(Cem, ResetRestoresMidpoint) {
  CemPlanner p(config(4, 20, 2, 2));
  Rng rng(7);
  p.plan(Vec::Zero(1), Quadratic(Vec::Constant(1, 0.8)), rng);
  EXPECT_FALSE(p.warm_start().isZero());
  p.reset();
  EXPECT_TRUE(p.warm_start().isZero());
}

TEST(Cem, NanRolloutsRankLast) {
  class Nan final : public RolloutModel {
   public:
    int state_dim() const override { return 1; }
    int action_dim() const override { return 1; }
    double step(std::span<const double>, std::span<const double> a, std::span<double> sn) const override {
      sn[0] = 0;
      return a[0] > 0 ? std::nan("") : a[0];
    }
  };
  CemPlanner p(config(1, 50, 5, 4));
  Rng rng(8);
  const auto r = p.plan(Vec::Zero(1), Nan{}, rng);
  EXPECT_LE(r.action[0], 0.0);
  EXPECT_TRUE(std::isfinite(r.expected_return));
}

TEST(Cem, ConfigValidation) {
  EXPECT_THROW(CemPlanner(config(0, 10, 1, 1)), std::invalid_argument);
  EXPECT_THROW(CemPlanner(config(2, 10, 11, 1)), std::invalid_argument);
  auto c = config(2, 10, 2, 1);
  c.action_hi[0] = -2.0;
  EXPECT_THROW(CemPlanner{c}, std::invalid_argument);
}

TEST(Population, ParallelMatchesSerial) {
  const auto fm = FeatureMap::random_fourier(4, 32, 1.0, 3);
  Rng rng(9);
  std::normal_distribution<double> z(0.0, 0.1);
  Mat Bt(32, 3), Br(32, 1);
  for (Eigen::Index i = 0; i < Bt.size(); ++i) Bt(i) = z(rng);
  for (Eigen::Index i = 0; i < Br.size(); ++i) Br(i) = z(rng);
  const SampledLinearModel model(fm, Bt, Br, 3);
  std::vector<Mat> pop(64, Mat(10, 1));
  for (auto& m : pop)
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = z(rng);
  const Vec s = Vec::Constant(3, 0.2);
  EXPECT_EQ(evaluate_population(model, s, pop), reference::evaluate_population_serial(model, s, pop));
}

TEST(SampledModel, StepMatchesPredictAndOracleReward) {
  const auto fm = FeatureMap::random_fourier(3, 8, 1.0, 4);
  const Mat Bt = Mat::Constant(8, 2, 0.1), Br = Mat::Constant(8, 1, -0.2);
  const Vec s = Vec::LinSpaced(2, 0.1, 0.4), a = Vec::Constant(1, -0.3);
  const auto pred = predict(s, a, Bt, Br, fm);
  Vec sn(2);
  const SampledLinearModel learned(fm, Bt, Br, 2);
  const double r = learned.step(std::span<const double>(s.data(), 2), std::span<const double>(a.data(), 1), std::span<double>(sn.data(), 2));
  EXPECT_LE((sn - pred.s_next).norm(), 1e-14);
  EXPECT_NEAR(r, pred.r, 1e-14);
  const SampledLinearModel oracle_model(fm, Bt, Mat(), 2, [](std::span<const double>, std::span<const double> act) { return 7.0 * act[0]; });
  EXPECT_DOUBLE_EQ(oracle_model.step(std::span<const double>(s.data(), 2), std::span<const double>(a.data(), 1), std::span<double>(sn.data(), 2)), -2.1);
}
