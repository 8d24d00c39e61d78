#include "ksrl/envs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ksrl;

namespace {

EnvSpec noiseless(EnvName n) {
  EnvSpec s = default_spec(n);
  s.noise_std = 0.0;
  return s;
}

Vec integrate_for(const Environment& env, Vec s, double dt, double seconds) {
  const int steps = static_cast<int>(std::lround(seconds / dt));
  for (int i = 0; i < steps; ++i) s = env.integrate(s, Vec::Zero(1), dt);
  return s;
}

}  // namespace

TEST(EnvSpecTest, Dimensions) {
  const auto p = default_spec(EnvName::PendulumSwingUp), c = default_spec(EnvName::ContinuousCartpole);
  EXPECT_EQ(p.state_dim, 3);
  EXPECT_EQ(c.state_dim, 4);
  EXPECT_EQ(p.action_dim, 1);
  EXPECT_EQ(c.action_dim, 1);
  EXPECT_EQ(p.horizon, 200);
  EXPECT_EQ(c.horizon, 200);
  EXPECT_DOUBLE_EQ(p.noise_std * p.noise_std, 0.01);
  EXPECT_EQ(parse_env_name("cartpole"), EnvName::ContinuousCartpole);
  EXPECT_THROW(parse_env_name("acrobot"), std::invalid_argument);
}

TEST(Pendulum, ResetOnUnitCircleAndSeeded) {
  const PendulumSwingUp env;
  Rng a(1), b(1);
  for (int i = 0; i < 100; ++i) {
    const Vec s = env.reset(a);
    EXPECT_NEAR(s[0] * s[0] + s[1] * s[1], 1.0, 1e-15);
    EXPECT_EQ(s, env.reset(b));
  }
}

TEST(Pendulum, HangingAtRestStaysAtRest) {
  const PendulumSwingUp env(noiseless(EnvName::PendulumSwingUp));
  Rng rng(2);
  Vec s = PendulumSwingUp::encode(std::numbers::pi, 0.0);
  for (int t = 0; t < 200; ++t) s = env.step(s, Vec::Zero(1), t, rng).next_state;
  EXPECT_NEAR(s[2], 0.0, 1e-12);
  EXPECT_NEAR(s[0], -1.0, 1e-12);
}

TEST(Pendulum, NoiselessStepDeterministic) {
  const PendulumSwingUp env(noiseless(EnvName::PendulumSwingUp));
  Rng a(3), b(4);
  const Vec s = PendulumSwingUp::encode(1.0, 0.5);
  const auto r1 = env.step(s, Vec::Constant(1, 0.7), 0, a), r2 = env.step(s, Vec::Constant(1, 0.7), 0, b);
  EXPECT_EQ(r1.next_state, r2.next_state);
  EXPECT_EQ(r1.reward, r2.reward);
  EXPECT_EQ(r1.step_index, 1);
}

TEST(Pendulum, InjectedNoiseVariance) {
  const PendulumSwingUp noisy;
  const PendulumSwingUp clean(noiseless(EnvName::PendulumSwingUp));
  Rng rng(5);
  const Vec s = PendulumSwingUp::encode(0.3, 0.2);
  const double base = clean.step(s, Vec::Zero(1), 0, rng).next_state[2];
  double sum = 0, sum2 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double e = noisy.step(s, Vec::Zero(1), 0, rng).next_state[2] - base;
    sum += e;
    sum2 += e * e;
  }
  const double var = (sum2 - sum * sum / n) / (n - 1);
  EXPECT_GE(var, 0.008);
  EXPECT_LE(var, 0.012);
}

TEST(Pendulum, RewardAndClipping) {
  const PendulumSwingUp env(noiseless(EnvName::PendulumSwingUp));
  const Vec up = PendulumSwingUp::encode(0.0, 0.0);
  const double a = 5.0;
  EXPECT_NEAR(env.reward(std::span<const double>(up.data(), 3), std::span<const double>(&a, 1)), -0.004, 1e-15);
  Rng rng(6);
  const auto big = env.step(up, Vec::Constant(1, 50.0), 0, rng), clipped = env.step(up, Vec::Constant(1, 2.0), 0, rng);
  EXPECT_EQ(big.next_state, clipped.next_state);
  Vec fast = PendulumSwingUp::encode(0.0, 7.99);
  EXPECT_LE(env.step(fast, Vec::Constant(1, 2.0), 0, rng).next_state[2], 8.0);
}

TEST(Pendulum, FirstOrderIntegrator) {
  const PendulumSwingUp env(noiseless(EnvName::PendulumSwingUp));
  const Vec s0 = PendulumSwingUp::encode(std::numbers::pi / 2, 0.0);
  const Vec truth = integrate_for(env, s0, 0.05 / 1000, 1.0);
  const double e1 = (integrate_for(env, s0, 0.05, 1.0) - truth).norm();
  const double e10 = (integrate_for(env, s0, 0.005, 1.0) - truth).norm();
  EXPECT_GE(e1 / e10, 2.0);
}

TEST(Pendulum, FiniteOverBoundedActions) {
  const PendulumSwingUp env;
  Rng rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec s = env.reset(rng);
  for (int t = 0; t < 200; ++t) {
    s = env.step(s, Vec::Constant(1, u(rng)), t, rng).next_state;
    ASSERT_TRUE(s.allFinite());
  }
}

TEST(Pendulum, RejectsBadInput) {
  const PendulumSwingUp env;
  Rng rng(8);
  Vec s = PendulumSwingUp::encode(0.0, 0.0);
  EXPECT_THROW(env.step(s, Vec::Zero(1), 200, rng), std::out_of_range);
  EXPECT_THROW(env.step(s, Vec::Zero(2), 0, rng), std::invalid_argument);
  s[2] = std::nan("");
  EXPECT_THROW(env.step(s, Vec::Zero(1), 0, rng), std::runtime_error);
}

TEST(Cartpole, ResetWithinInitBounds) {
  const ContinuousCartpole env;
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Vec s = env.reset(rng);
    EXPECT_LE(s.cwiseAbs().maxCoeff(), constants::cartpole::kInitSpread);
  }
}

TEST(Cartpole, FailureIsAbsorbingWithZeroReward) {
  const ContinuousCartpole env;
  Rng rng(10);
  Vec s = Vec::Zero(4);
  s[2] = 0.5;
  const auto r = env.step(s, Vec::Constant(1, 1.0), 3, rng);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.next_state, s);
  EXPECT_TRUE(r.terminated);
  const auto ok = env.step(Vec::Zero(4), Vec::Zero(1), 0, rng);
  EXPECT_EQ(ok.reward, 1.0);
}

TEST(Cartpole, UprightEquilibriumWithoutNoise) {
  const ContinuousCartpole env(noiseless(EnvName::ContinuousCartpole));
  Rng rng(11);
  Vec s = Vec::Zero(4);
  for (int t = 0; t < 50; ++t) s = env.step(s, Vec::Zero(1), t, rng).next_state;
  EXPECT_EQ(s, Vec::Zero(4));
}

TEST(Cartpole, PushAcceleratesCart) {
  const ContinuousCartpole env(noiseless(EnvName::ContinuousCartpole));
  Rng rng(12);
  const Vec s = env.step(Vec::Zero(4), Vec::Constant(1, 1.0), 0, rng).next_state;
  // x_acc = F/M_total - m l theta_acc / M_total at rest, with theta_acc < 0 for a push to the right.
  EXPECT_GT(s[1], 0.0);
  EXPECT_LT(env.integrate(s, Vec::Constant(1, 1.0), 0.02)[3], 0.0);
}

TEST(Angles, WrapIntoHalfOpenRange) {
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.25), -0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(std::numbers::pi), -std::numbers::pi, 1e-15);
}
