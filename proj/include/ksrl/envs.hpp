#pragma once

#include "ksrl/model.hpp"
#include "ksrl/planner.hpp"

#include <memory>
#include <span>
#include <string>

namespace ksrl {

/// Physical constants for the bundled environments, following the classic open-source
/// pendulum and cart-pole definitions.
namespace constants {
namespace pendulum {
inline constexpr double kGravity = 10.0;
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kDt = 0.05;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr double kMaxTorque = 2.0;
/// Reset angle is pi + U(-kInitAngleSpread, kInitAngleSpread), i.e. hanging down.
inline constexpr double kInitAngleSpread = 0.05;
}  // namespace pendulum
namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kForceMag = 10.0;
inline constexpr double kDt = 0.02;
inline constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
inline constexpr double kXThreshold = 2.4;
/// Each state component starts in U(-kInitSpread, kInitSpread).
inline constexpr double kInitSpread = 0.05;
}  // namespace cartpole
inline constexpr int kHorizon = 200;
inline constexpr double kNoiseStd = 0.1;  // variance 0.01
}  // namespace constants

enum class EnvName { PendulumSwingUp, ContinuousCartpole };

std::string to_string(EnvName e);
EnvName parse_env_name(const std::string& s);

struct EnvSpec {
  EnvName name = EnvName::PendulumSwingUp;
  int state_dim = 3;
  int action_dim = 1;
  int horizon = constants::kHorizon;
  double noise_std = constants::kNoiseStd;
  Vec action_lo;
  Vec action_hi;
  bool oracle_rewards = false;
  /// Typical magnitude of each (s, a) input, used to scale random Fourier frequencies.
  Vec input_scale;
};

EnvSpec default_spec(EnvName name);

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  int step_index = 0;
  bool terminated = false;
};

/// Stateless stochastic environment: every call is a pure function of its inputs and the rng.
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }

  virtual Vec reset(Rng& rng) const = 0;
  /// Clips the action, integrates one step and adds N(0, noise_std^2) to raw coordinates.
  /// Throws std::runtime_error on a non-finite state.
  StepResult step(const Vec& state, const Vec& action, int step_index, Rng& rng) const;
  /// True reward r(s, a) of taking a in s.
  virtual double reward(std::span<const double> s, std::span<const double> a) const = 0;
  RewardFunction reward_function() const;

  /// Noise-free integration with an explicit time step, exposed for integrator tests.
  virtual Vec integrate(const Vec& state, const Vec& action, double dt) const = 0;
  virtual double default_dt() const = 0;

 protected:
  virtual Vec add_noise(const Vec& next_state, Rng& rng) const = 0;
  virtual bool absorbing(const Vec& state) const { (void)state; return false; }

  EnvSpec spec_;
};

/// State (cos theta, sin theta, theta_dot); theta = 0 is upright.
class PendulumSwingUp final : public Environment {
 public:
  explicit PendulumSwingUp(EnvSpec spec = default_spec(EnvName::PendulumSwingUp));
  Vec reset(Rng& rng) const override;
  double reward(std::span<const double> s, std::span<const double> a) const override;
  Vec integrate(const Vec& state, const Vec& action, double dt) const override;
  double default_dt() const override { return constants::pendulum::kDt; }

  static Vec encode(double theta, double theta_dot);

 protected:
  Vec add_noise(const Vec& next_state, Rng& rng) const override;
};

/// State (x, x_dot, theta, theta_dot); action in [-1, 1] scales the push force.
class ContinuousCartpole final : public Environment {
 public:
  explicit ContinuousCartpole(EnvSpec spec = default_spec(EnvName::ContinuousCartpole));
  Vec reset(Rng& rng) const override;
  double reward(std::span<const double> s, std::span<const double> a) const override;
  Vec integrate(const Vec& state, const Vec& action, double dt) const override;
  double default_dt() const override { return constants::cartpole::kDt; }

  static bool failed(std::span<const double> s);

 protected:
  Vec add_noise(const Vec& next_state, Rng& rng) const override;
  bool absorbing(const Vec& state) const override;
};

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);

/// Wraps an angle to [-pi, pi).
double wrap_angle(double theta);

}  // namespace ksrl
