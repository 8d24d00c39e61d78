#include "ksrl/metrics.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksrl {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_metrics_row(const MetricsRecord& r) {
  std::ostringstream os;
  os << r.episode << ',' << r.steps << ',' << format_double(r.episode_return) << ',' << r.dict_size
     << ',' << format_double(r.ksd) << ',' << format_double(r.epsilon) << ','
     << format_double(r.post_var_trace) << ',' << format_double(r.wall_s) << ',' << r.seed << ','
     << r.algo;
  return os.str();
}

std::string format_audit_line(const AuditRecord& a) {
  // Fixed key order keeps the file byte-stable.
  std::ostringstream os;
  os << "{\"k\":" << a.k << ",\"removed\":" << a.removed << ",\"ksd2_pre\":" << format_double(a.ksd2_pre)
     << ",\"ksd2_post\":" << format_double(a.ksd2_post) << ",\"eps\":" << format_double(a.eps)
     << ",\"size_pre\":" << a.size_pre << ",\"floor\":" << a.floor
     << ",\"lengthscale\":" << format_double(a.lengthscale) << "}";
  return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& column, std::size_t line_no) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("metrics.csv line " + std::to_string(line_no) + ": bad " + column +
                             " value '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("metrics.csv line 1: unexpected header");
  }
  std::vector<MetricsRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      throw std::runtime_error("metrics.csv line " + std::to_string(line_no) + ": expected 10 fields, got " +
                               std::to_string(f.size()));
    }
    MetricsRecord r;
    r.episode = parse_number<int>(f[0], "episode", line_no);
    r.steps = parse_number<long>(f[1], "steps", line_no);
    r.episode_return = parse_number<double>(f[2], "return", line_no);
    r.dict_size = parse_number<long>(f[3], "dict_size", line_no);
    r.ksd = parse_number<double>(f[4], "ksd", line_no);
    r.epsilon = parse_number<double>(f[5], "epsilon", line_no);
    r.post_var_trace = parse_number<double>(f[6], "post_var_trace", line_no);
    r.wall_s = parse_number<double>(f[7], "wall_s", line_no);
    r.seed = parse_number<unsigned long long>(f[8], "seed", line_no);
    r.algo = f[9];
    if (r.algo != "ksrl" && r.algo != "psrl") {
      throw std::runtime_error("metrics.csv line " + std::to_string(line_no) + ": unknown algo '" + r.algo + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AuditRecord> read_audit_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<AuditRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      AuditRecord a;
      a.k = j.at("k").get<int>();
      a.removed = j.at("removed").get<long>();
      a.ksd2_pre = j.at("ksd2_pre").get<double>();
      a.ksd2_post = j.at("ksd2_post").get<double>();
      a.eps = j.at("eps").get<double>();
      a.size_pre = j.value("size_pre", 0L);
      a.floor = j.value("floor", 0L);
      a.lengthscale = j.value("lengthscale", 0.0);
      out.push_back(a);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("audit.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> read_timing_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 2) throw std::runtime_error("timing.csv line " + std::to_string(line_no) + ": expected 2 fields");
    out.push_back(parse_number<double>(f[1], "wall_s", line_no));
  }
  return out;
}

}  // namespace ksrl
