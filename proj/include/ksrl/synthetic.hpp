#pragma once

#include "ksrl/model.hpp"

#include <vector>

namespace ksrl {

/// Isotropic Gaussian mixture with an exact score, used for synthetic dictionaries.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Vec> means;
  std::vector<double> stds;

  static GaussianMixture standard_normal(int dim);
  /// `components` random centres in [-spread, spread]^dim, stds in [0.5, 1.5].
  static GaussianMixture random(int dim, int components, double spread, Rng& rng);

  int dim() const { return static_cast<int>(means.front().size()); }
  RowMat sample(std::size_t n, Rng& rng) const;
  double log_density(const Vec& x) const;
  Vec score(const Vec& x) const;
  RowMat scores(const RowMat& points) const;
};

}  // namespace ksrl
