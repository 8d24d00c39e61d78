#include "ksrl/model.hpp"

#include <stdexcept>

namespace ksrl {

GaussianLinearPosterior::GaussianLinearPosterior(int feature_dim, int output_dim, double prior_var,
                                                 double noise_var)
    : prior_var_(prior_var), noise_var_(noise_var) {
  if (feature_dim < 1 || output_dim < 1) throw std::invalid_argument("posterior dimensions must be positive");
  if (!(prior_var > 0.0) || !(noise_var > 0.0)) {
    throw std::invalid_argument("prior and noise variances must be positive");
  }
  precision_ = Mat::Identity(feature_dim, feature_dim) / prior_var;
  rhs_ = Mat::Zero(feature_dim, output_dim);
  mean_ = Mat::Zero(feature_dim, output_dim);
}

void GaussianLinearPosterior::update(const Mat& Z, const Mat& Y) {
  if (Z.rows() != Y.rows()) throw std::invalid_argument("feature and target batches differ in length");
  if (Z.rows() == 0) return;
  if (Z.cols() != precision_.rows() || Y.cols() != mean_.cols()) {
    throw std::invalid_argument("batch shape does not match the posterior");
  }
  if (!Z.allFinite() || !Y.allFinite()) throw std::invalid_argument("posterior batch has non-finite entries");

  Mat precision = precision_;
  precision.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), 1.0 / noise_var_);
  precision = precision.selfadjointView<Eigen::Lower>();
  Mat rhs = rhs_ + Z.transpose() * Y / noise_var_;

  Eigen::LLT<Mat> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("posterior precision is not positive definite; increase prior_var or add jitter");
  }
  precision_ = std::move(precision);
  rhs_ = std::move(rhs);
  mean_ = llt.solve(rhs_);
  observations_ += static_cast<std::size_t>(Z.rows());
}

Mat GaussianLinearPosterior::sample(Rng& rng) const {
  const Eigen::Index m = precision_.rows();
  Eigen::LLT<Mat> llt(precision_);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-8 * precision_.trace() / static_cast<double>(m);
    llt.compute(precision_ + jitter * Mat::Identity(m, m));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("posterior precision Cholesky failed even after jitter");
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat xi(m, mean_.cols());
  for (Eigen::Index c = 0; c < xi.cols(); ++c) {
    for (Eigen::Index r = 0; r < m; ++r) xi(r, c) = normal(rng);
  }
  // precision = L L^T, so L^-T xi has covariance precision^-1.
  return mean_ + llt.matrixU().solve(xi);
}

double GaussianLinearPosterior::covariance_trace() const {
  Eigen::LLT<Mat> llt(precision_);
  return llt.solve(Mat::Identity(precision_.rows(), precision_.cols())).trace();
}

}  // namespace ksrl
