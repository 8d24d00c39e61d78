#pragma once

// Serial reference versions of the parallel kernels. Kept for testing and benchmarking.

#include "ksrl/planner.hpp"
#include "ksrl/stein.hpp"

#include <vector>

namespace ksrl::reference {

/// Full n x n Stein Gram matrix.
Mat stein_gram_matrix(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg);

/// Single-threaded Gram statistics from the upper triangle (each pair evaluated once).
SteinGram gram_build_serial(const RowMat& points, const RowMat& scores, const BaseKernelConfig& cfg);

std::vector<double> evaluate_population_serial(const RolloutModel& model, const Vec& s,
                                               const std::vector<Mat>& population);

}  // namespace ksrl::reference
