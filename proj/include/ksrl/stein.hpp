#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ksrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
/// One particle per row. Rows are contiguous so kernels can read them as spans.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelKind { IMQ, RBF };

/// Radial base kernel. IMQ is (c^2 + |x-y|^2 / l^2)^beta, RBF is exp(-|x-y|^2 / (2 l^2)).
struct BaseKernelConfig {
  KernelKind kind = KernelKind::IMQ;
  double lengthscale = 1.0;
  double imq_offset = 1.0;
  double imq_exponent = -0.5;
  /// Test hook for mutation checks: negates the score-product term of the Stein kernel.
  bool fault_flip_sign = false;

  void validate() const;
};

struct KernelDerivatives {
  double value = 0.0;
  Vec grad_x;
  Vec grad_y;
  /// sum_l d^2 k / dx_l dy_l
  double mixed_trace = 0.0;
};

double base_kernel(const Vec& x, const Vec& y, const BaseKernelConfig& cfg);
KernelDerivatives base_kernel_derivatives(const Vec& x, const Vec& y, const BaseKernelConfig& cfg);

/// Langevin Stein kernel k0(h_i, h_j) built from the base kernel and the target scores.
double stein_kernel(const Vec& hi, const Vec& hj, const Vec& score_i, const Vec& score_j,
                    const BaseKernelConfig& cfg);

namespace detail {

/// Unchecked hot-path evaluation. All spans must share one length.
inline double stein_kernel_raw(std::span<const double> hi, std::span<const double> hj,
                               std::span<const double> si, std::span<const double> sj,
                               const BaseKernelConfig& cfg, double inv_l2) {
  const std::size_t d = hi.size();
  double r2 = 0.0, ss = 0.0, sd = 0.0;
  for (std::size_t l = 0; l < d; ++l) {
    const double diff = hi[l] - hj[l];
    r2 += diff * diff;
    ss += si[l] * sj[l];
    sd += (sj[l] - si[l]) * diff;
  }
  // Radial profile phi(t) with t = r^2 and its first two derivatives in t.
  double phi, dphi, ddphi;
  if (cfg.kind == KernelKind::IMQ) {
    const double beta = cfg.imq_exponent;
    const double q = cfg.imq_offset * cfg.imq_offset + r2 * inv_l2;
    const double qb = beta == -0.5 ? 1.0 / std::sqrt(q) : std::pow(q, beta);
    phi = qb;
    dphi = beta * inv_l2 * qb / q;
    ddphi = beta * (beta - 1.0) * inv_l2 * inv_l2 * qb / (q * q);
  } else {
    phi = std::exp(-0.5 * r2 * inv_l2);
    dphi = -0.5 * inv_l2 * phi;
    ddphi = 0.25 * inv_l2 * inv_l2 * phi;
  }
  const double score_term = cfg.fault_flip_sign ? -ss * phi : ss * phi;
  return score_term + 2.0 * dphi * sd - 2.0 * static_cast<double>(d) * dphi - 4.0 * ddphi * r2;
}

inline std::span<const double> row_span(const RowMat& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

void check_particle_set(const RowMat& points, const RowMat& scores);

}  // namespace detail

/// Cached Stein Gram statistics. The full n x n matrix is never stored.
struct SteinGram {
  std::vector<double> row_sums;
  std::vector<double> diag;
  double total = 0.0;

  std::size_t size() const { return row_sums.size(); }
};

/// sqrt(total / n^2)
double ksd_from_gram(const SteinGram& g);
/// Squared KSD, total / n^2.
double ksd2_from_gram(const SteinGram& g);

/// Exact V-statistic KSD over all pairs. Throws std::domain_error on an empty set.
double ksd(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg);

/// OpenMP-parallel over rows; each row is summed in index order so the result is
/// independent of the thread count.
SteinGram gram_build(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg);

/// k0(h_i, h_j) for every i, including i == j.
Vec kernel_row(const RowMat& points, const RowMat& scores, Eigen::Index j,
               const BaseKernelConfig& cfg);

/// Drops particle j. `row` is kernel_row(..., j) on the set before removal.
SteinGram gram_remove(SteinGram g, std::size_t j, const Vec& row);

/// Median pairwise Euclidean distance, floored at 1e-3. Sets larger than
/// `max_points` are strided down to that many rows first.
double median_lengthscale(const RowMat& points, std::size_t max_points = 1000);

}  // namespace ksrl
