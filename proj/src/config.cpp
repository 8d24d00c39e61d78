#include "ksrl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

}  // namespace

bool parse_bool(const std::string& s) {
  std::string v = s;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("'" + s + "' is not a boolean");
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

AgentConfig apply_config(AgentConfig cfg, const KeyValues& kv) {
  if (auto it = kv.find("env"); it != kv.end()) {
    const AgentConfig fresh = default_config(parse_env_name(it->second), cfg.algorithm);
    cfg.env = fresh.env;
    cfg.cem = fresh.cem;
  }
  for (const auto& [key, v] : kv) {
    if (key == "env" || key == "out") continue;
    if (key == "algo") cfg.algorithm = parse_algorithm(v);
    else if (key == "alpha") cfg.alpha = to_double(key, v);
    else if (key == "episodes") cfg.episodes = static_cast<int>(to_integer(key, v));
    else if (key == "seed") {
      const long long s = to_integer(key, v);
      if (s < 0) throw std::invalid_argument("seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "kernel") {
      if (v == "imq") cfg.kernel.kind = KernelKind::IMQ;
      else if (v == "rbf") cfg.kernel.kind = KernelKind::RBF;
      else throw std::invalid_argument("kernel must be imq or rbf");
    } else if (key == "lengthscale") {
      if (v == "median") cfg.median_lengthscale = true;
      else {
        cfg.median_lengthscale = false;
        cfg.kernel.lengthscale = to_double(key, v);
      }
    } else if (key == "imq-offset") cfg.kernel.imq_offset = to_double(key, v);
    else if (key == "imq-exponent") cfg.kernel.imq_exponent = to_double(key, v);
    else if (key == "score") {
      if (v == "model") cfg.score = ScoreKind::Model;
      else if (v == "gaussfit") cfg.score = ScoreKind::GaussianFit;
      else throw std::invalid_argument("score must be model or gaussfit");
    } else if (key == "oracle-rewards") cfg.env.oracle_rewards = parse_bool(v);
    else if (key == "features") cfg.features = static_cast<int>(to_integer(key, v));
    else if (key == "feature-kind") {
      if (v == "rff") cfg.feature_kind = FeatureKind::RandomFourier;
      else if (v == "poly") cfg.feature_kind = FeatureKind::Polynomial;
      else throw std::invalid_argument("feature-kind must be rff or poly");
    } else if (key == "feature-bandwidth") cfg.feature_bandwidth = to_double(key, v);
    else if (key == "prior-var") cfg.prior_var = to_double(key, v);
    else if (key == "noise-var") cfg.noise_var = to_double(key, v);
    else if (key == "noise-std") cfg.env.noise_std = to_double(key, v);
    else if (key == "horizon") {
      cfg.env.horizon = static_cast<int>(to_integer(key, v));
      if (cfg.env.horizon < 1) throw std::invalid_argument("horizon must be positive");
    }
    else if (key == "jitter") cfg.target_jitter = to_double(key, v);
    else if (key == "thinning") cfg.thinning = parse_bool(v);
    else if (key == "spmcmc-batches") cfg.spmcmc_batches = static_cast<int>(to_integer(key, v));
    else if (key == "popsize") cfg.cem.popsize = static_cast<int>(to_integer(key, v));
    else if (key == "elites") cfg.cem.n_elites = static_cast<int>(to_integer(key, v));
    else if (key == "plan-horizon") cfg.cem.horizon = static_cast<int>(to_integer(key, v));
    else if (key == "max-iter") cfg.cem.max_iter = static_cast<int>(to_integer(key, v));
    else if (key == "init-std") cfg.cem.init_std = to_double(key, v);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return cfg;
}

std::string format_config(const AgentConfig& cfg) {
  std::ostringstream os;
  os << "env = " << to_string(cfg.env.name) << '\n'
     << "algo = " << to_string(cfg.algorithm) << '\n'
     << "alpha = " << format_double(cfg.alpha) << '\n'
     << "episodes = " << cfg.episodes << '\n'
     << "seed = " << cfg.seed << '\n'
     << "kernel = " << (cfg.kernel.kind == KernelKind::IMQ ? "imq" : "rbf") << '\n'
     << "lengthscale = " << (cfg.median_lengthscale ? std::string("median") : format_double(cfg.kernel.lengthscale)) << '\n'
     << "imq-offset = " << format_double(cfg.kernel.imq_offset) << '\n'
     << "imq-exponent = " << format_double(cfg.kernel.imq_exponent) << '\n'
     << "score = " << (cfg.score == ScoreKind::Model ? "model" : "gaussfit") << '\n'
     << "oracle-rewards = " << (cfg.env.oracle_rewards ? "true" : "false") << '\n'
     << "features = " << cfg.features << '\n'
     << "feature-kind = " << (cfg.feature_kind == FeatureKind::RandomFourier ? "rff" : "poly") << '\n'
     << "feature-bandwidth = " << format_double(cfg.feature_bandwidth) << '\n'
     << "prior-var = " << format_double(cfg.prior_var) << '\n'
     << "noise-var = " << format_double(cfg.noise_var) << '\n'
     << "noise-std = " << format_double(cfg.env.noise_std) << '\n'
     << "horizon = " << cfg.env.horizon << '\n'
     << "jitter = " << format_double(cfg.target_jitter) << '\n'
     << "thinning = " << (cfg.thinning ? "true" : "false") << '\n'
     << "spmcmc-batches = " << cfg.spmcmc_batches << '\n'
     << "popsize = " << cfg.cem.popsize << '\n'
     << "elites = " << cfg.cem.n_elites << '\n'
     << "plan-horizon = " << cfg.cem.horizon << '\n'
     << "max-iter = " << cfg.cem.max_iter << '\n'
     << "init-std = " << format_double(cfg.cem.init_std) << '\n';
  return os.str();
}

}  // namespace ksrl
