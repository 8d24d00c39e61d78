#include "ksrl/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ksrl {

FeatureMap FeatureMap::random_fourier(int input_dim, int feature_dim, double bandwidth,
                                      std::uint64_t seed, const Vec& input_scale) {
  if (input_dim < 1 || feature_dim < 1) throw std::invalid_argument("feature map dimensions must be positive");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("feature bandwidth must be positive");
  Vec scale = input_scale.size() == 0 ? Vec::Ones(input_dim) : input_scale;
  if (scale.size() != input_dim || !(scale.array() > 0.0).all()) {
    throw std::invalid_argument("input scale must be positive with one entry per input");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Mat W(feature_dim, input_dim);
  Vec b(feature_dim);
  for (int i = 0; i < feature_dim; ++i) {
    for (int j = 0; j < input_dim; ++j) W(i, j) = normal(rng) / (bandwidth * scale[j]);
    b[i] = phase(rng);
  }
  return random_fourier(std::move(W), std::move(b));
}

FeatureMap FeatureMap::random_fourier(Mat frequencies, Vec phases) {
  if (frequencies.rows() != phases.size() || frequencies.rows() == 0) {
    throw std::invalid_argument("frequency rows must match the phase count");
  }
  FeatureMap fm;
  fm.kind_ = FeatureKind::RandomFourier;
  fm.input_dim_ = static_cast<int>(frequencies.cols());
  fm.feature_dim_ = static_cast<int>(frequencies.rows());
  fm.W_ = std::move(frequencies);
  fm.b_ = std::move(phases);
  fm.amplitude_ = std::sqrt(2.0 / fm.feature_dim_);
  return fm;
}

FeatureMap FeatureMap::polynomial(int input_dim) {
  if (input_dim < 1) throw std::invalid_argument("feature map dimensions must be positive");
  FeatureMap fm;
  fm.kind_ = FeatureKind::Polynomial;
  fm.input_dim_ = input_dim;
  fm.feature_dim_ = 1 + input_dim + input_dim * (input_dim + 1) / 2;
  return fm;
}

void FeatureMap::value(std::span<const double> x, std::span<double> z) const {
  const auto n = static_cast<std::size_t>(input_dim_);
  if (kind_ == FeatureKind::RandomFourier) {
    for (int i = 0; i < feature_dim_; ++i) {
      double arg = b_[i];
      for (std::size_t j = 0; j < n; ++j) arg += W_(i, static_cast<Eigen::Index>(j)) * x[j];
      z[static_cast<std::size_t>(i)] = amplitude_ * std::cos(arg);
    }
    return;
  }
  std::size_t k = 0;
  z[k++] = 1.0;
  for (std::size_t j = 0; j < n; ++j) z[k++] = x[j];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) z[k++] = x[i] * x[j];
  }
}

Vec FeatureMap::value(const Vec& x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("feature input has the wrong dimension");
  if (!x.allFinite()) throw std::invalid_argument("feature input has non-finite entries");
  Vec z(feature_dim_);
  value({x.data(), static_cast<std::size_t>(x.size())}, {z.data(), static_cast<std::size_t>(z.size())});
  return z;
}

FeatureMap::Eval FeatureMap::features(const Vec& x) const {
  Eval out;
  out.z = value(x);
  out.jacobian = Mat::Zero(feature_dim_, input_dim_);
  if (kind_ == FeatureKind::RandomFourier) {
    const Vec arg = W_ * x + b_;
    for (int i = 0; i < feature_dim_; ++i) {
      out.jacobian.row(i) = -amplitude_ * std::sin(arg[i]) * W_.row(i);
    }
    return out;
  }
  const int n = input_dim_;
  for (int j = 0; j < n; ++j) out.jacobian(1 + j, j) = 1.0;
  int k = 1 + n;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++k) {
      out.jacobian(k, i) += x[j];
      out.jacobian(k, j) += x[i];
    }
  }
  return out;
}

Mat design_matrix(const std::vector<Particle>& particles, const FeatureMap& fm) {
  Mat Z(static_cast<Eigen::Index>(particles.size()), fm.dim());
  Vec x(fm.input_dim());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Particle& p = particles[i];
    if (p.s.size() + p.a.size() != fm.input_dim()) {
      throw std::invalid_argument("particle (s, a) size does not match the feature map input");
    }
    x << p.s, p.a;
    Z.row(static_cast<Eigen::Index>(i)) = fm.value(x).transpose();
  }
  return Z;
}

Prediction predict(const Vec& s, const Vec& a, const Mat& B_transition, const Mat& B_reward,
                   const FeatureMap& fm) {
  Vec x(s.size() + a.size());
  x << s, a;
  const Vec z = fm.value(x);
  if (B_transition.rows() != fm.dim() || B_transition.cols() != s.size()) {
    throw std::invalid_argument("transition weights must be (feature_dim x state_dim)");
  }
  Prediction p;
  p.s_next = s + B_transition.transpose() * z;
  if (B_reward.size() > 0) {
    if (B_reward.rows() != fm.dim() || B_reward.cols() != 1) {
      throw std::invalid_argument("reward weights must be (feature_dim x 1)");
    }
    p.r = B_reward.col(0).dot(z);
  }
  return p;
}

}  // namespace ksrl
