#include "ksrl/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ksrl {

namespace {

struct GaussianFit {
  Vec mean;
  Mat precision;
  double log_norm;
};

GaussianFit fit_gaussian(const Vec& mean, const Mat& covariance) {
  Eigen::LLT<Mat> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("target covariance is not positive definite");
  const Eigen::Index d = covariance.rows();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return {mean, llt.solve(Mat::Identity(d, d)),
          -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet)};
}

GaussianFit moment_match(const RowMat& points, double jitter) {
  if (points.rows() == 0) throw std::invalid_argument("cannot fit a target to an empty dictionary");
  const Vec mean = points.colwise().mean().transpose();
  const Mat centered = points.rowwise() - mean.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(points.rows()) - 1.0);
  Mat cov = centered.transpose() * centered / denom;
  cov.diagonal().array() += jitter;
  return fit_gaussian(mean, cov);
}

}  // namespace

SteinTarget SteinTarget::gaussian(const Vec& mean, const Mat& covariance) {
  if (mean.size() != covariance.rows() || covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("gaussian target shape mismatch");
  }
  const GaussianFit g = fit_gaussian(mean, covariance);
  SteinTarget t;
  t.fitted_ = true;
  t.kind_ = ScoreKind::GaussianFit;
  t.mean_ = g.mean;
  t.precision_ = g.precision;
  t.log_norm_ = g.log_norm;
  return t;
}

SteinTarget SteinTarget::gaussian_fit(const RowMat& points, double jitter) {
  const GaussianFit g = moment_match(points, jitter);
  SteinTarget t;
  t.fitted_ = true;
  t.kind_ = ScoreKind::GaussianFit;
  t.mean_ = g.mean;
  t.precision_ = g.precision;
  t.log_norm_ = g.log_norm;
  return t;
}

SteinTarget SteinTarget::model(const RowMat& points, int state_dim, int action_dim,
                               const FeatureMap& fm, const Mat& mean_weights, double noise_var,
                               double jitter) {
  const int dx = state_dim + action_dim;
  if (points.cols() != 2 * state_dim + action_dim) throw std::invalid_argument("particle width does not match (s, a, s')");
  if (fm.input_dim() != dx) throw std::invalid_argument("feature map input does not match (s, a)");
  if (mean_weights.rows() != fm.dim() || mean_weights.cols() != state_dim) {
    throw std::invalid_argument("transition weights must be (feature_dim x state_dim)");
  }
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const RowMat sa = points.leftCols(dx);
  const GaussianFit g = moment_match(sa, jitter);
  SteinTarget t;
  t.fitted_ = true;
  t.kind_ = ScoreKind::Model;
  t.state_dim_ = state_dim;
  t.action_dim_ = action_dim;
  t.mean_ = g.mean;
  t.precision_ = g.precision;
  t.log_norm_ = g.log_norm - 0.5 * state_dim * std::log(2.0 * std::numbers::pi * noise_var);
  t.fm_ = fm;
  t.weights_ = mean_weights;
  t.noise_var_ = noise_var;
  return t;
}

void SteinTarget::require_fitted() const {
  if (!fitted_) throw std::logic_error("Stein target used before it was fitted");
}

double SteinTarget::log_density(const Vec& h) const {
  require_fitted();
  if (kind_ == ScoreKind::GaussianFit) {
    if (h.size() != mean_.size()) throw std::invalid_argument("particle dimension does not match target");
    const Vec c = h - mean_;
    return log_norm_ - 0.5 * c.dot(precision_ * c);
  }
  const int dx = state_dim_ + action_dim_;
  if (h.size() != dx + state_dim_) throw std::invalid_argument("particle dimension does not match target");
  const Vec x = h.head(dx);
  const Vec c = x - mean_;
  const Vec resid = h.tail(state_dim_) - h.head(state_dim_) - weights_.transpose() * fm_.value(x);
  return log_norm_ - 0.5 * c.dot(precision_ * c) - 0.5 * resid.squaredNorm() / noise_var_;
}

Vec SteinTarget::score(const Vec& h) const {
  require_fitted();
  if (!h.allFinite()) throw std::invalid_argument("score requested at a non-finite particle");
  if (kind_ == ScoreKind::GaussianFit) {
    if (h.size() != mean_.size()) throw std::invalid_argument("particle dimension does not match target");
    return -(precision_ * (h - mean_));
  }
  const int ds = state_dim_;
  const int dx = ds + action_dim_;
  if (h.size() != dx + ds) throw std::invalid_argument("particle dimension does not match target");
  const Vec x = h.head(dx);
  const auto f = fm_.features(x);
  const Vec scaled = (h.tail(ds) - h.head(ds) - weights_.transpose() * f.z) / noise_var_;

  // d(conditional mean)/dx = [I 0] + B^T dz/dx
  Mat jac_mean = weights_.transpose() * f.jacobian;
  jac_mean.leftCols(ds) += Mat::Identity(ds, ds);

  Vec g(h.size());
  g.head(dx) = -(precision_ * (x - mean_)) + jac_mean.transpose() * scaled;
  g.tail(ds) = -scaled;
  return g;
}

RowMat SteinTarget::scores(const RowMat& points) const {
  require_fitted();
  RowMat out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = score(points.row(i).transpose()).transpose();
  }
  return out;
}

}  // namespace ksrl
