#include "ksrl/stein.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ksrl {

void BaseKernelConfig::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("kernel lengthscale must be positive and finite");
  }
  if (kind == KernelKind::IMQ) {
    if (!(imq_offset > 0.0)) throw std::invalid_argument("IMQ offset c must be positive");
    if (!(imq_exponent > -1.0 && imq_exponent < 0.0)) {
      throw std::invalid_argument("IMQ exponent beta must lie in (-1, 0)");
    }
  }
}

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string("dimension mismatch in ") + what + ": " +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double base_kernel(const Vec& x, const Vec& y, const BaseKernelConfig& cfg) {
  return base_kernel_derivatives(x, y, cfg).value;
}

KernelDerivatives base_kernel_derivatives(const Vec& x, const Vec& y, const BaseKernelConfig& cfg) {
  cfg.validate();
  require_same_size(x, y, "base_kernel");
  require_finite(x, "kernel argument x");
  require_finite(y, "kernel argument y");

  const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
  const Vec diff = x - y;
  const double r2 = diff.squaredNorm();
  double phi, dphi, ddphi;
  if (cfg.kind == KernelKind::IMQ) {
    const double beta = cfg.imq_exponent;
    const double q = cfg.imq_offset * cfg.imq_offset + r2 * inv_l2;
    phi = std::pow(q, beta);
    dphi = beta * inv_l2 * std::pow(q, beta - 1.0);
    ddphi = beta * (beta - 1.0) * inv_l2 * inv_l2 * std::pow(q, beta - 2.0);
  } else {
    phi = std::exp(-0.5 * r2 * inv_l2);
    dphi = -0.5 * inv_l2 * phi;
    ddphi = 0.25 * inv_l2 * inv_l2 * phi;
  }
  KernelDerivatives out;
  out.value = phi;
  out.grad_x = 2.0 * dphi * diff;
  out.grad_y = -out.grad_x;
  out.mixed_trace = -2.0 * static_cast<double>(x.size()) * dphi - 4.0 * ddphi * r2;
  return out;
}

double stein_kernel(const Vec& hi, const Vec& hj, const Vec& score_i, const Vec& score_j,
                    const BaseKernelConfig& cfg) {
  cfg.validate();
  require_same_size(hi, hj, "stein_kernel");
  require_same_size(hi, score_i, "stein_kernel");
  require_same_size(hi, score_j, "stein_kernel");
  require_finite(hi, "particle h_i");
  require_finite(hj, "particle h_j");
  const auto n = static_cast<std::size_t>(hi.size());
  return detail::stein_kernel_raw({hi.data(), n}, {hj.data(), n}, {score_i.data(), n},
                                  {score_j.data(), n}, cfg,
                                  1.0 / (cfg.lengthscale * cfg.lengthscale));
}

namespace detail {

void check_particle_set(const RowMat& points, const RowMat& scores) {
  if (points.rows() == 0) throw std::domain_error("KSD of an empty particle set is undefined");
  if (points.rows() != scores.rows() || points.cols() != scores.cols()) {
    throw std::invalid_argument("points and scores must have identical shapes");
  }
  if (!points.allFinite() || !scores.allFinite()) {
    throw std::invalid_argument("particles and scores must be finite");
  }
}

}  // namespace detail

double ksd2_from_gram(const SteinGram& g) {
  if (g.size() == 0) throw std::domain_error("KSD of an empty particle set is undefined");
  const double n = static_cast<double>(g.size());
  return g.total / (n * n);
}

double ksd_from_gram(const SteinGram& g) { return std::sqrt(std::max(0.0, ksd2_from_gram(g))); }

double ksd(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg) {
  return ksd_from_gram(gram_build(points, scores, cfg));
}

SteinGram gram_build(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg) {
  cfg.validate();
  detail::check_particle_set(points, scores);
  const Eigen::Index n = points.rows();
  const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);

  SteinGram g;
  g.row_sums.assign(static_cast<std::size_t>(n), 0.0);
  g.diag.assign(static_cast<std::size_t>(n), 0.0);

#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto hi = detail::row_span(points, i);
    const auto si = detail::row_span(scores, i);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      acc += detail::stein_kernel_raw(hi, detail::row_span(points, j), si,
                                      detail::row_span(scores, j), cfg, inv_l2);
    }
    g.row_sums[static_cast<std::size_t>(i)] = acc;
    g.diag[static_cast<std::size_t>(i)] = detail::stein_kernel_raw(hi, hi, si, si, cfg, inv_l2);
  }
  for (double r : g.row_sums) g.total += r;
  return g;
}

Vec kernel_row(const RowMat& points, const RowMat& scores, Eigen::Index j,
               const BaseKernelConfig& cfg) {
  detail::check_particle_set(points, scores);
  if (j < 0 || j >= points.rows()) throw std::out_of_range("kernel_row index out of range");
  const Eigen::Index n = points.rows();
  const double inv_l2 = 1.0 / (cfg.lengthscale * cfg.lengthscale);
  const auto hj = detail::row_span(points, j);
  const auto sj = detail::row_span(scores, j);
  Vec row(n);
#pragma omp parallel for schedule(static) if (n > 2048)
  for (Eigen::Index i = 0; i < n; ++i) {
    row[i] = detail::stein_kernel_raw(detail::row_span(points, i), hj,
                                      detail::row_span(scores, i), sj, cfg, inv_l2);
  }
  return row;
}

SteinGram gram_remove(SteinGram g, std::size_t j, const Vec& row) {
  const std::size_t n = g.size();
  if (n < 2) throw std::domain_error("cannot remove a particle from a set of size < 2");
  if (j >= n) throw std::out_of_range("gram_remove index out of range");
  if (static_cast<std::size_t>(row.size()) != n) {
    throw std::invalid_argument("kernel row length must equal the current set size");
  }
  g.total = g.total - 2.0 * g.row_sums[j] + g.diag[j];
  for (std::size_t i = 0; i < n; ++i) g.row_sums[i] -= row[static_cast<Eigen::Index>(i)];
  g.row_sums.erase(g.row_sums.begin() + static_cast<std::ptrdiff_t>(j));
  g.diag.erase(g.diag.begin() + static_cast<std::ptrdiff_t>(j));
  return g;
}

double median_lengthscale(const RowMat& points, std::size_t max_points) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) return 1.0;
  const std::size_t stride = max_points > 0 && n > max_points ? (n + max_points - 1) / max_points : 1;
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(static_cast<Eigen::Index>(i));

  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      dists.push_back((points.row(idx[a]) - points.row(idx[b])).norm());
    }
  }
  if (dists.empty()) return 1.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return std::max(*mid, 1e-3);
}

}  // namespace ksrl
