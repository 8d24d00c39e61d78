#include "ksrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ksrl {

std::string to_string(EnvName e) {
  return e == EnvName::PendulumSwingUp ? "pendulum" : "cartpole";
}

EnvName parse_env_name(const std::string& s) {
  if (s == "pendulum") return EnvName::PendulumSwingUp;
  if (s == "cartpole") return EnvName::ContinuousCartpole;
  throw std::invalid_argument("unknown environment '" + s + "' (expected pendulum or cartpole)");
}

EnvSpec default_spec(EnvName name) {
  EnvSpec spec;
  spec.name = name;
  spec.action_dim = 1;
  if (name == EnvName::PendulumSwingUp) {
    spec.state_dim = 3;
    spec.action_lo = Vec::Constant(1, -constants::pendulum::kMaxTorque);
    spec.action_hi = Vec::Constant(1, constants::pendulum::kMaxTorque);
    spec.input_scale = (Vec(4) << 1.0, 1.0, 4.0, 2.0).finished();
  } else {
    spec.state_dim = 4;
    spec.action_lo = Vec::Constant(1, -1.0);
    spec.action_hi = Vec::Constant(1, 1.0);
    spec.input_scale = (Vec(5) << 1.0, 1.0, 0.2, 1.0, 1.0).finished();
  }
  return spec;
}

double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t < 0.0) t += two_pi;
  return t - std::numbers::pi;
}

StepResult Environment::step(const Vec& state, const Vec& action, int step_index, Rng& rng) const {
  if (state.size() != spec_.state_dim || action.size() != spec_.action_dim) {
    throw std::invalid_argument("state or action has the wrong dimension");
  }
  if (!state.allFinite() || !action.allFinite()) {
    throw std::runtime_error("non-finite state or action at step " + std::to_string(step_index));
  }
  if (step_index < 0 || step_index >= spec_.horizon) {
    throw std::out_of_range("step index outside the episode horizon");
  }
  const Vec a = action.cwiseMax(spec_.action_lo).cwiseMin(spec_.action_hi);
  const auto s_span = std::span<const double>(state.data(), static_cast<std::size_t>(state.size()));
  const auto a_span = std::span<const double>(a.data(), static_cast<std::size_t>(a.size()));

  StepResult out;
  out.step_index = step_index + 1;
  out.reward = reward(s_span, a_span);
  if (absorbing(state)) {
    out.next_state = state;
    out.terminated = true;
    return out;
  }
  out.next_state = integrate(state, a, default_dt());
  if (spec_.noise_std > 0.0) out.next_state = add_noise(out.next_state, rng);
  if (!out.next_state.allFinite()) {
    throw std::runtime_error("environment produced a non-finite state at step " + std::to_string(step_index));
  }
  out.terminated = absorbing(out.next_state);
  return out;
}

RewardFunction Environment::reward_function() const {
  return [this](std::span<const double> s, std::span<const double> a) { return reward(s, a); };
}

// ---- pendulum -------------------------------------------------------------

PendulumSwingUp::PendulumSwingUp(EnvSpec spec) : Environment(std::move(spec)) {
  if (spec_.state_dim != 3 || spec_.action_dim != 1) throw std::invalid_argument("pendulum is 3-d state, 1-d action");
}

Vec PendulumSwingUp::encode(double theta, double theta_dot) {
  return (Vec(3) << std::cos(theta), std::sin(theta), theta_dot).finished();
}

Vec PendulumSwingUp::reset(Rng& rng) const {
  namespace c = constants::pendulum;
  std::uniform_real_distribution<double> spread(-c::kInitAngleSpread, c::kInitAngleSpread);
  return encode(std::numbers::pi + spread(rng), 0.0);
}

double PendulumSwingUp::reward(std::span<const double> s, std::span<const double> a) const {
  const double theta = std::atan2(s[1], s[0]);
  const double u = std::clamp(a[0], -constants::pendulum::kMaxTorque, constants::pendulum::kMaxTorque);
  return -(theta * theta + 0.1 * s[2] * s[2] + 0.001 * u * u);
}

Vec PendulumSwingUp::integrate(const Vec& state, const Vec& action, double dt) const {
  namespace c = constants::pendulum;
  const double theta = std::atan2(state[1], state[0]);
  const double u = std::clamp(action[0], -c::kMaxTorque, c::kMaxTorque);
  double theta_dot = state[2] + (3.0 * c::kGravity / (2.0 * c::kLength) * std::sin(theta) +
                                 3.0 / (c::kMass * c::kLength * c::kLength) * u) * dt;
  theta_dot = std::clamp(theta_dot, -c::kMaxSpeed, c::kMaxSpeed);
  return encode(theta + theta_dot * dt, theta_dot);
}

Vec PendulumSwingUp::add_noise(const Vec& next_state, Rng& rng) const {
  std::normal_distribution<double> noise(0.0, spec_.noise_std);
  const double theta = std::atan2(next_state[1], next_state[0]) + noise(rng);
  const double theta_dot = next_state[2] + noise(rng);
  return encode(theta, theta_dot);
}

// ---- cart-pole ------------------------------------------------------------

ContinuousCartpole::ContinuousCartpole(EnvSpec spec) : Environment(std::move(spec)) {
  if (spec_.state_dim != 4 || spec_.action_dim != 1) throw std::invalid_argument("cartpole is 4-d state, 1-d action");
}

bool ContinuousCartpole::failed(std::span<const double> s) {
  return std::abs(s[0]) > constants::cartpole::kXThreshold ||
         std::abs(s[2]) > constants::cartpole::kThetaThreshold;
}

Vec ContinuousCartpole::reset(Rng& rng) const {
  std::uniform_real_distribution<double> spread(-constants::cartpole::kInitSpread,
                                                constants::cartpole::kInitSpread);
  Vec s(4);
  for (int i = 0; i < 4; ++i) s[i] = spread(rng);
  return s;
}

double ContinuousCartpole::reward(std::span<const double> s, std::span<const double> a) const {
  (void)a;
  return failed(s) ? 0.0 : 1.0;
}

Vec ContinuousCartpole::integrate(const Vec& state, const Vec& action, double dt) const {
  namespace c = constants::cartpole;
  const double total_mass = c::kMassCart + c::kMassPole;
  const double polemass_length = c::kMassPole * c::kHalfLength;
  const double force = std::clamp(action[0], -1.0, 1.0) * c::kForceMag;
  const double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (c::kGravity * sin_t - cos_t * temp) /
                           (c::kHalfLength * (4.0 / 3.0 - c::kMassPole * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
  return (Vec(4) << x + dt * x_dot, x_dot + dt * x_acc, theta + dt * theta_dot, theta_dot + dt * theta_acc)
      .finished();
}

Vec ContinuousCartpole::add_noise(const Vec& next_state, Rng& rng) const {
  std::normal_distribution<double> noise(0.0, spec_.noise_std);
  Vec out = next_state;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += noise(rng);
  return out;
}

bool ContinuousCartpole::absorbing(const Vec& state) const {
  return failed({state.data(), static_cast<std::size_t>(state.size())});
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  if (spec.name == EnvName::PendulumSwingUp) return std::make_unique<PendulumSwingUp>(spec);
  return std::make_unique<ContinuousCartpole>(spec);
}

}  // namespace ksrl
