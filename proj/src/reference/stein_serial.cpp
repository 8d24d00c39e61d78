#include "ksrl/reference.hpp"

namespace ksrl::reference {

Mat stein_gram_matrix(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg) {
  cfg.validate();
  detail::check_particle_set(points, scores);
  const Eigen::Index n = points.rows();
  const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      K(i, j) = detail::stein_kernel_raw(detail::row_span(points, i), detail::row_span(points, j),
                                         detail::row_span(scores, i), detail::row_span(scores, j), cfg, inv_l2);
      K(j, i) = K(i, j);
    }
  }
  return K;
}

SteinGram gram_build_serial(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg) {
  cfg.validate();
  detail::check_particle_set(points, scores);
  const Eigen::Index n = points.rows();
  const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
  SteinGram g;
  g.row_sums.assign(static_cast<std::size_t>(n), 0.0);
  g.diag.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto hi = detail::row_span(points, i);
    const auto si = detail::row_span(scores, i);
    const double kii = detail::stein_kernel_raw(hi, hi, si, si, cfg, inv_l2);
    g.diag[static_cast<std::size_t>(i)] = kii;
    g.row_sums[static_cast<std::size_t>(i)] += kii;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double kij = detail::stein_kernel_raw(hi, detail::row_span(points, j), si,
                                                  detail::row_span(scores, j), cfg, inv_l2);
      g.row_sums[static_cast<std::size_t>(i)] += kij;
      g.row_sums[static_cast<std::size_t>(j)] += kij;
    }
  }
  for (double r : g.row_sums) g.total += r;
  return g;
}

}  // namespace ksrl::reference
