#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ksrl {

/// One row of metrics.csv.
struct MetricsRecord {
  int episode = 0;
  long steps = 0;
  double episode_return = 0.0;
  long dict_size = 0;
  double ksd = 0.0;
  double epsilon = 0.0;
  double post_var_trace = 0.0;
  double wall_s = 0.0;
  unsigned long long seed = 0;
  std::string algo;
};

inline constexpr const char* kMetricsHeader =
    "episode,steps,return,dict_size,ksd,epsilon,post_var_trace,wall_s,seed,algo";

/// Per-episode thinning decision, one JSON object per line of audit.jsonl.
struct AuditRecord {
  int k = 0;
  long removed = 0;
  double ksd2_pre = 0.0;
  double ksd2_post = 0.0;
  double eps = 0.0;
  long size_pre = 0;
  long floor = 0;
  double lengthscale = 0.0;
};

/// Shortest round-trip decimal form, so CSV bytes depend only on the values.
std::string format_double(double v);

std::string format_metrics_row(const MetricsRecord& r);
std::string format_audit_line(const AuditRecord& a);

/// Parses metrics.csv. Throws std::runtime_error naming the 1-based line on malformed input.
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);
std::vector<AuditRecord> read_audit_jsonl(const std::filesystem::path& path);

/// episode,wall_s sidecar with the measured wall-clock.
std::vector<double> read_timing_csv(const std::filesystem::path& path);

}  // namespace ksrl
