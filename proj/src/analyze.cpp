#include "ksrl/analyze.hpp"

#include "ksrl/config.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ksrl {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope needs equal-length inputs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (dn * sxy - sx * sy) / denom;
}

RunAnalysis analyze_run(const std::filesystem::path& dir, const AnalyzeOptions& opts) {
  const auto rows = read_metrics_csv(dir / "metrics.csv");
  if (rows.empty()) throw std::runtime_error(dir.string() + ": metrics.csv has no episodes");
  RunAnalysis a;
  a.dir = dir;
  a.algo = rows.front().algo;
  a.seed = rows.front().seed;
  a.episodes = static_cast<int>(rows.size());
  a.final_dict_size = rows.back().dict_size;
  if (std::filesystem::exists(dir / "config.txt")) {
    const auto kv = read_config_file(dir / "config.txt");
    if (auto it = kv.find("env"); it != kv.end()) a.env = it->second;
  }

  std::vector<double> k, size, ksd;
  for (const auto& r : rows) {
    if (r.episode < opts.k_min) continue;
    k.push_back(r.episode);
    size.push_back(static_cast<double>(r.dict_size));
    ksd.push_back(r.ksd);
  }
  a.size_exponent = loglog_slope(k, size);
  a.ksd_exponent = loglog_slope(k, ksd);

  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opts.window)), rows.size());
  double acc = 0.0;
  for (std::size_t i = rows.size() - w; i < rows.size(); ++i) acc += rows[i].episode_return;
  a.final_window_return = acc / static_cast<double>(w);

  if (std::filesystem::exists(dir / "timing.csv")) {
    for (double t : read_timing_csv(dir / "timing.csv")) a.total_wall_s += t;
  } else {
    for (const auto& r : rows) a.total_wall_s += r.wall_s;
  }
  return a;
}

AnalysisReport analyze(const std::vector<std::filesystem::path>& run_dirs, const AnalyzeOptions& opts) {
  if (run_dirs.empty()) throw std::invalid_argument("analyze needs at least one run directory");
  AnalysisReport report;
  for (const auto& d : run_dirs) report.runs.push_back(analyze_run(d, opts));

  std::map<std::pair<std::string, unsigned long long>, const RunAnalysis*> psrl;
  for (const auto& r : report.runs) {
    if (r.algo == "psrl") psrl.emplace(std::make_pair(r.env, r.seed), &r);
  }
  for (const auto& r : report.runs) {
    if (r.algo != "ksrl") continue;
    const auto it = psrl.find({r.env, r.seed});
    if (it == psrl.end()) continue;
    const RunAnalysis& p = *it->second;
    PairComparison c;
    c.ksrl_dir = r.dir;
    c.psrl_dir = p.dir;
    c.return_ratio = p.final_window_return != 0.0 ? r.final_window_return / p.final_window_return : 0.0;
    c.size_ratio = p.final_dict_size != 0 ? static_cast<double>(r.final_dict_size) / p.final_dict_size : 0.0;
    c.time_ratio = p.total_wall_s > 0.0 ? r.total_wall_s / p.total_wall_s : 0.0;
    report.comparisons.push_back(c);
  }
  return report;
}

std::string format_report(const AnalysisReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(32) << "run" << std::setw(10) << "env" << std::setw(6) << "algo"
     << std::right << std::setw(6) << "seed" << std::setw(6) << "K" << std::setw(8) << "|D_K|"
     << std::setw(10) << "size_exp" << std::setw(10) << "ksd_exp" << std::setw(14) << "final_ret"
     << std::setw(10) << "wall_s" << '\n';
  os << std::fixed;
  for (const auto& r : report.runs) {
    os << std::left << std::setw(32) << r.dir.filename().string() << std::setw(10) << r.env
       << std::setw(6) << r.algo << std::right << std::setw(6) << r.seed << std::setw(6) << r.episodes
       << std::setw(8) << r.final_dict_size << std::setprecision(3) << std::setw(10) << r.size_exponent
       << std::setw(10) << r.ksd_exponent << std::setprecision(2) << std::setw(14) << r.final_window_return
       << std::setw(10) << r.total_wall_s << '\n';
  }
  if (!report.comparisons.empty()) {
    os << "\nksrl vs psrl\n";
    os << std::left << std::setw(32) << "ksrl run" << std::setw(32) << "psrl run" << std::right
       << std::setw(12) << "return" << std::setw(10) << "size" << std::setw(10) << "time" << '\n';
    for (const auto& c : report.comparisons) {
      os << std::left << std::setw(32) << c.ksrl_dir.filename().string() << std::setw(32)
         << c.psrl_dir.filename().string() << std::right << std::setprecision(3) << std::setw(12)
         << c.return_ratio << std::setw(10) << c.size_ratio << std::setw(10) << c.time_ratio << '\n';
    }
  }
  return os.str();
}

}  // namespace ksrl
