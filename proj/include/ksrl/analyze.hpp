#pragma once

#include "ksrl/metrics.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ksrl {

/// Least-squares slope of log(y) against log(x). Non-positive pairs are skipped.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct RunAnalysis {
  std::filesystem::path dir;
  std::string env;
  std::string algo;
  unsigned long long seed = 0;
  int episodes = 0;
  long final_dict_size = 0;
  double size_exponent = 0.0;
  double ksd_exponent = 0.0;
  double final_window_return = 0.0;
  double total_wall_s = 0.0;
};

struct PairComparison {
  std::filesystem::path ksrl_dir;
  std::filesystem::path psrl_dir;
  double return_ratio = 0.0;
  double size_ratio = 0.0;
  double time_ratio = 0.0;
};

struct AnalysisReport {
  std::vector<RunAnalysis> runs;
  std::vector<PairComparison> comparisons;
};

struct AnalyzeOptions {
  /// Exponent fits use episodes k >= k_min.
  int k_min = 1;
  /// Final-window return averages the last `window` episodes.
  int window = 5;
};

/// Read-only over the run directories. KSRL and PSRL runs sharing env and seed are paired.
AnalysisReport analyze(const std::vector<std::filesystem::path>& run_dirs, const AnalyzeOptions& opts = {});
RunAnalysis analyze_run(const std::filesystem::path& dir, const AnalyzeOptions& opts = {});

std::string format_report(const AnalysisReport& report);

}  // namespace ksrl
