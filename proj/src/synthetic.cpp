#include "ksrl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ksrl {

GaussianMixture GaussianMixture::standard_normal(int dim) {
  return {{1.0}, {Vec::Zero(dim)}, {1.0}};
}

GaussianMixture GaussianMixture::random(int dim, int components, double spread, Rng& rng) {
  if (components < 1 || dim < 1) throw std::invalid_argument("mixture needs at least one component");
  std::uniform_real_distribution<double> centre(-spread, spread), sd(0.5, 1.5), w(0.5, 1.5);
  GaussianMixture g;
  for (int c = 0; c < components; ++c) {
    Vec m(dim);
    for (int j = 0; j < dim; ++j) m[j] = centre(rng);
    g.means.push_back(m);
    g.stds.push_back(sd(rng));
    g.weights.push_back(w(rng));
  }
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  for (double& x : g.weights) x /= total;
  return g;
}

RowMat GaussianMixture::sample(std::size_t n, Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMat out(static_cast<Eigen::Index>(n), dim());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const std::size_t c = pick(rng);
    for (int j = 0; j < dim(); ++j) out(i, j) = means[c][j] + stds[c] * normal(rng);
  }
  return out;
}

namespace {

// Per-component log(w_c N(x; mu_c, s_c^2 I)).
std::vector<double> component_logs(const GaussianMixture& g, const Vec& x) {
  std::vector<double> out(g.weights.size());
  const double d = static_cast<double>(x.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double s2 = g.stds[c] * g.stds[c];
    out[c] = std::log(g.weights[c]) - 0.5 * d * std::log(2.0 * std::numbers::pi * s2) -
             0.5 * (x - g.means[c]).squaredNorm() / s2;
  }
  return out;
}

}  // namespace

double GaussianMixture::log_density(const Vec& x) const {
  const auto logs = component_logs(*this, x);
  const double mx = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - mx);
  return mx + std::log(acc);
}

Vec GaussianMixture::score(const Vec& x) const {
  const auto logs = component_logs(*this, x);
  const double mx = *std::max_element(logs.begin(), logs.end());
  Vec g = Vec::Zero(x.size());
  double norm = 0.0;
  for (std::size_t c = 0; c < logs.size(); ++c) {
    const double r = std::exp(logs[c] - mx);
    norm += r;
    g -= r * (x - means[c]) / (stds[c] * stds[c]);
  }
  return g / norm;
}

RowMat GaussianMixture::scores(const RowMat& points) const {
  RowMat out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out.row(i) = score(points.row(i).transpose()).transpose();
  return out;
}

}  // namespace ksrl
