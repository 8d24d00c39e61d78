#pragma once

#include "ksrl/stein.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ksrl {

/// One observed transition (s, a, s') with its reward. Flattened as h = (s, a, s').
struct Particle {
  Vec s;
  Vec a;
  Vec s_next;
  double r = 0.0;

  Eigen::Index dim() const { return 2 * s.size() + a.size(); }
  Vec flatten() const;
  bool finite() const;
};

/// Stacks flattened particles into one row each.
RowMat flatten_particles(const std::vector<Particle>& particles);

/// Thinning budget and dictionary size floor, parameterised by the growth exponent alpha.
struct BudgetSchedule {
  double alpha = 0.5;
  int horizon = 200;

  void validate() const;
};

/// log(k) / f(k)^2 = k^-(1+alpha) for k >= 2; k = 1 reuses the k = 2 value.
double epsilon_k(const BudgetSchedule& sched, long k);

/// ceil(sqrt(k^(1+alpha) * log(k+1))), at least 1.
long size_floor(const BudgetSchedule& sched, long k);

/// Dictionary of flattened particles with frozen target scores and the cached Stein Gram.
/// Each row carries a caller-chosen id and the episode that added it, so callers can map
/// survivors back to their own particle storage.
class Coreset {
 public:
  Coreset() = default;
  Coreset(RowMat points, RowMat scores, BaseKernelConfig kernel, std::vector<std::size_t> ids = {},
          std::vector<int> episode_added = {});

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  bool empty() const { return size() == 0; }

  const RowMat& points() const { return points_; }
  const RowMat& scores() const { return scores_; }
  const SteinGram& gram() const { return gram_; }
  const std::vector<std::size_t>& ids() const { return ids_; }
  const std::vector<int>& episode_added() const { return episode_added_; }
  const BaseKernelConfig& kernel() const { return kernel_; }

  double ksd2() const { return ksd2_from_gram(gram_); }
  /// Removal delta 2 * row_sums[j] - diag[j]; larger means removing j lowers the double sum more.
  double removal_delta(std::size_t j) const;
  void remove(std::size_t j);

  /// Rebuilds the Gram from scratch (used by audits).
  SteinGram rebuild_gram() const;

 private:
  RowMat points_;
  RowMat scores_;
  BaseKernelConfig kernel_;
  std::vector<std::size_t> ids_;
  std::vector<int> episode_added_;
  SteinGram gram_;
};

struct ThinReport {
  std::size_t size_before = 0;
  std::size_t removed = 0;
  double ksd2_before = 0.0;
  double ksd2_after = 0.0;
  /// Ids of the removed rows, in removal order.
  std::vector<std::size_t> removed_ids;
};

/// Greedy KSD thinning. Repeatedly removes the particle whose removal gives the smallest
/// KSD^2, as long as the result stays strictly below KSD^2(input) + eps and the size stays
/// at or above `floor`. eps may be +infinity.
ThinReport ksd_thin(Coreset& c, double eps, long floor);

/// Index of the candidate with the smallest KSD increment k0(h,h) + 2 sum_i k0(h_i, h)
/// against the coreset. Lowest index wins ties.
std::size_t spmcmc_select(const RowMat& candidates, const RowMat& candidate_scores,
                          const Coreset& c);

}  // namespace ksrl
