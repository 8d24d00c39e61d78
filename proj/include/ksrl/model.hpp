#pragma once

#include "ksrl/coreset.hpp"
#include "ksrl/stein.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace ksrl {

using Rng = std::mt19937_64;

enum class FeatureKind { RandomFourier, Polynomial };

/// Differentiable feature map z(x) over state-action inputs.
///
/// RandomFourier: z = sqrt(2/m) cos(W x + b), with W_ij ~ N(0, 1 / (bandwidth * scale_j)^2)
/// and b ~ U[0, 2 pi). Polynomial: [1, x, x_i x_j for i <= j].
class FeatureMap {
 public:
  FeatureMap() = default;

  static FeatureMap random_fourier(int input_dim, int feature_dim, double bandwidth,
                                   std::uint64_t seed, const Vec& input_scale = Vec());
  /// Explicit frequencies and phases; bandwidth is informational only.
  static FeatureMap random_fourier(Mat frequencies, Vec phases);
  static FeatureMap polynomial(int input_dim);

  FeatureKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int dim() const { return feature_dim_; }
  const Mat& frequencies() const { return W_; }
  const Vec& phases() const { return b_; }

  Vec value(const Vec& x) const;
  /// Allocation-free evaluation for rollout loops. `z` must have dim() entries.
  void value(std::span<const double> x, std::span<double> z) const;

  struct Eval {
    Vec z;
    Mat jacobian;  // dim() x input_dim()
  };
  Eval features(const Vec& x) const;

 private:
  FeatureKind kind_ = FeatureKind::RandomFourier;
  int input_dim_ = 0;
  int feature_dim_ = 0;
  Mat W_;
  Vec b_;
  double amplitude_ = 0.0;
};

/// Stacks z(s, a) for each particle into an (n x m) design matrix.
Mat design_matrix(const std::vector<Particle>& particles, const FeatureMap& fm);

/// Conjugate Bayesian linear regression with a shared precision across outputs:
/// Y = Z B + noise, prior B_col ~ N(0, prior_var I), noise ~ N(0, noise_var).
class GaussianLinearPosterior {
 public:
  GaussianLinearPosterior() = default;
  GaussianLinearPosterior(int feature_dim, int output_dim, double prior_var, double noise_var);

  /// Rows of Z are feature vectors; rows of Y the matching targets.
  void update(const Mat& Z, const Mat& Y);

  const Mat& precision() const { return precision_; }
  const Mat& mean() const { return mean_; }
  int feature_dim() const { return static_cast<int>(precision_.rows()); }
  int output_dim() const { return static_cast<int>(mean_.cols()); }
  double noise_var() const { return noise_var_; }
  double prior_var() const { return prior_var_; }
  std::size_t observations() const { return observations_; }

  /// Each column drawn independently from N(mean_col, precision^-1).
  Mat sample(Rng& rng) const;
  /// trace(precision^-1)
  double covariance_trace() const;

 private:
  Mat precision_;
  Mat rhs_;  // precision * mean
  Mat mean_;
  double prior_var_ = 1.0;
  double noise_var_ = 0.01;
  std::size_t observations_ = 0;
};

/// Mean prediction under sampled weights: s' = s + B_transition^T z(s,a), r = B_reward^T z(s,a).
struct Prediction {
  Vec s_next;
  double r = 0.0;
};
Prediction predict(const Vec& s, const Vec& a, const Mat& B_transition, const Mat& B_reward,
                   const FeatureMap& fm);

enum class ScoreKind { Model, GaussianFit };

/// Target density over h = (s, a, s') whose score drives the Stein kernel.
///
/// Model: log N((s,a); mu, Sigma) + log N(s'; s + B^T z(s,a), noise_var I), with (mu, Sigma)
/// moment-matched on the dictionary. GaussianFit: one moment-matched Gaussian over h.
class SteinTarget {
 public:
  SteinTarget() = default;

  static SteinTarget gaussian(const Vec& mean, const Mat& covariance);
  static SteinTarget gaussian_fit(const RowMat& points, double jitter = 1e-6);
  static SteinTarget model(const RowMat& points, int state_dim, int action_dim, const FeatureMap& fm,
                           const Mat& mean_weights, double noise_var, double jitter = 1e-6);

  bool fitted() const { return fitted_; }
  ScoreKind kind() const { return kind_; }

  double log_density(const Vec& h) const;
  Vec score(const Vec& h) const;
  RowMat scores(const RowMat& points) const;

 private:
  void require_fitted() const;

  bool fitted_ = false;
  ScoreKind kind_ = ScoreKind::GaussianFit;
  int state_dim_ = 0;
  int action_dim_ = 0;
  Vec mean_;
  Mat precision_;
  double log_norm_ = 0.0;
  FeatureMap fm_;
  Mat weights_;
  double noise_var_ = 0.01;
};

}  // namespace ksrl
