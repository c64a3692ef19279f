#include "stablab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace stablab {
namespace {

struct ExperimentInfo {
  const char* name;
  std::vector<std::string> required;
};

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"convex_lower", {"n", "T"}},
      {"strongly_convex_lower", {"n", "T"}},
      {"nonconvex_decreasing", {"n", "T"}},
      {"nonconvex_constant", {"n", "T"}},
      {"permutation_vs_uniform", {"n", "T"}},
      {"datadep_convex", {"n", "d", "T"}},
      {"prop1", {"d", "n"}},
      {"table1_sweep", {}},
      {"oracle_crosscheck", {"n", "T"}},
  };
  return list;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiments()) {
    if (name == e.name) return &e;
  }
  return nullptr;
}

std::string required_keys_listing() {
  std::string out = "required keys: experiment (one of";
  for (const auto& e : experiments()) out += std::string(" ") + e.name;
  out += "); per experiment:";
  for (const auto& e : experiments()) {
    out += std::string(" ") + e.name + " {";
    for (std::size_t k = 0; k < e.required.size(); ++k) out += (k ? ", " : "") + e.required[k];
    out += "}";
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(x)) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "key '" + key + "': expected a real number, got '" + value + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const double x = parse_real(key, value);
  if (x < 0.0 || x != std::floor(x) || x > 1e15) {
    throw ConfigError(key, "key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(x);
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("");
    const auto x = std::stoull(value, &used, 0);
    if (used != value.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "key '" + key + "': expected an unsigned integer, got '" + value + "'");
  }
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ConfigError(key, "key '" + key + "': expected 0 or 1, got '" + value + "'");
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void violated(const std::string& key, const std::string& hypothesis, const std::string& detail) {
  throw ConfigError(key, "key '" + key + "': hypothesis " + hypothesis + " violated (" + detail + ")");
}

std::string kv(const char* name, double v) {
  std::ostringstream out;
  out << name << " = " << v;
  return out.str();
}

void validate_nonconvex(const ExperimentConfig& c) {
  if (c.d < 2) violated("d", "d ≥ 2", kv("d", static_cast<double>(c.d)));
  if (!(c.beta > 0.0)) violated("beta", "β > 0", kv("beta", c.beta));
  if (!(c.a > 0.0 && c.a <= 0.1)) violated("a", "0 < a ≤ 0.1", kv("a", c.a));
  if (c.t0 < 1) violated("t0", "t0 ≥ 1", kv("t0", static_cast<double>(c.t0)));
  if (c.t0 > c.T) violated("t0", "t0 ≤ T", kv("t0", static_cast<double>(c.t0)) + ", " + kv("T", static_cast<double>(c.T)));
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : experiments()) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "n", "d", "K", "T", "M", "t0", "T_mc", "a", "b", "alpha", "beta", "mu", "R", "c", "L",
      "seed", "sampler", "output", "workers", "record_timing"};
  return keys;
}

void validate_config(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (!find_experiment(e)) {
    throw ConfigError("experiment", "key 'experiment': unknown experiment '" + e + "'; " + required_keys_listing());
  }
  if (c.workers < 1) violated("workers", "workers ≥ 1", kv("workers", c.workers));
  if (!(c.c > 0.0)) violated("c", "c > 0", kv("c", c.c));
  if (e != "table1_sweep") {
    if (c.n < 2) violated("n", "n ≥ 2", kv("n", static_cast<double>(c.n)));
    if (c.M < 1) violated("M", "M ≥ 1", kv("M", static_cast<double>(c.M)));
  }
  if (e != "prop1" && e != "table1_sweep" && c.T < 1) violated("T", "T ≥ 1", kv("T", static_cast<double>(c.T)));

  if (e == "convex_lower" || e == "oracle_crosscheck") {
    if (c.K < 2) violated("K", "K ≥ 2", kv("K", static_cast<double>(c.K)));
    if (c.d <= c.K) violated("d", "d > K", kv("d", static_cast<double>(c.d)) + ", " + kv("K", static_cast<double>(c.K)));
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) violated("alpha", "0 < α_t λ_K ≤ 1 with λ_K = 1", kv("alpha", c.alpha));
    if (e == "oracle_crosscheck" &&
        std::pow(static_cast<double>(c.n), static_cast<double>(c.T)) > kEnumerationCap) {
      violated("T", "n^T ≤ 2e6 (enumeration cap)",
               kv("n", static_cast<double>(c.n)) + ", " + kv("T", static_cast<double>(c.T)));
    }
  } else if (e == "strongly_convex_lower") {
    if (c.d < 2) violated("d", "d ≥ 2", kv("d", static_cast<double>(c.d)));
    if (!(c.beta > 0.0)) violated("beta", "β > 0", kv("beta", c.beta));
  } else if (e == "nonconvex_decreasing" || e == "nonconvex_constant" || e == "permutation_vs_uniform") {
    validate_nonconvex(c);
    if (e == "nonconvex_constant" && c.T_mc < 1) violated("T_mc", "T_mc ≥ 1", kv("T_mc", static_cast<double>(c.T_mc)));
  } else if (e == "datadep_convex") {
    if (c.n < 2 * c.d) {
      violated("n", "n ≥ 2d", kv("n", static_cast<double>(c.n)) + ", " + kv("d", static_cast<double>(c.d)));
    }
    if (!(c.R > 0.0)) violated("R", "R > 0", kv("R", c.R));
    const double nd = static_cast<double>(c.n);
    if (!(c.mu >= 1.0 / (nd * nd * nd * nd))) violated("mu", "μ ≥ γ/n⁴ with γ = 1", kv("mu", c.mu));
    const double cap = c.mu / (2.0 * c.R * c.R);
    if (!(c.alpha > 0.0) || c.alpha > cap * (1.0 + 1e-12)) {
      violated("alpha", "0 < α ≤ μ/(2β²R²) with β = 1", kv("alpha", c.alpha) + ", cap = " + format_real(cap));
    }
  } else if (e == "prop1") {
    if (!(c.d > 10)) violated("d", "d > 10", kv("d", static_cast<double>(c.d)));
    if (c.n < 2 * c.d) {
      violated("n", "n ≥ 2d", kv("n", static_cast<double>(c.n)) + ", " + kv("d", static_cast<double>(c.d)));
    }
    if (c.M < 100) violated("M", "M ≥ 100", kv("M", static_cast<double>(c.M)));
    if (!(c.mu >= 0.0)) violated("mu", "μ ≥ 0", kv("mu", c.mu));
  } else if (e == "table1_sweep") {
    if (!(c.a > 0.0 && c.a <= 0.1)) violated("a", "0 < a ≤ 0.1", kv("a", c.a));
    if (!(c.beta > 0.0)) violated("beta", "β > 0", kv("beta", c.beta));
    if (!(c.b > 0.0)) violated("b", "b > 0", kv("b", c.b));
    if (!(c.L > 0.0)) violated("L", "L > 0", kv("L", c.L));
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) violated("alpha", "0 < α_t λ_K ≤ 1 with λ_K = 1", kv("alpha", c.alpha));
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const auto& known = config_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      std::string list;
      for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError(key, "unknown key '" + key + "' (known keys: " + list + ")");
    }
    if (values.count(key)) throw ConfigError(key, "key '" + key + "' given more than once");
    values[key] = value;
  }

  if (!values.count("experiment") || values["experiment"].empty()) {
    throw ConfigError("experiment", "missing required key 'experiment'; " + required_keys_listing());
  }
  ExperimentConfig c;
  c.experiment = values["experiment"];
  const ExperimentInfo* info = find_experiment(c.experiment);
  if (!info) {
    throw ConfigError("experiment",
                      "key 'experiment': unknown experiment '" + c.experiment + "'; " + required_keys_listing());
  }
  for (const auto& key : info->required) {
    if (!values.count(key)) {
      throw ConfigError(key, "missing required key '" + key + "' for experiment " + c.experiment + "; " +
                                 required_keys_listing());
    }
  }

  // Experiment-specific defaults.
  const std::string& e = c.experiment;
  if (e == "convex_lower") {
    c.M = 20000;
  } else if (e == "strongly_convex_lower") {
    c.d = 3;
    c.M = 20000;
  } else if (e == "nonconvex_decreasing" || e == "permutation_vs_uniform") {
    c.d = 3;
    c.beta = 0.5;
    c.M = 5000;
  } else if (e == "nonconvex_constant") {
    c.d = 3;
    c.M = 20000;
  } else if (e == "table1_sweep") {
    c.beta = 0.5;
  } else if (e == "oracle_crosscheck") {
    c.alpha = 0.1;
  }

  auto has = [&](const char* k) { return values.count(k) > 0; };
  for (const auto& [key, value] : values) {
    if (key == "experiment") continue;
    if (key == "n") c.n = parse_count(key, value);
    else if (key == "d") c.d = parse_count(key, value);
    else if (key == "K") c.K = parse_count(key, value);
    else if (key == "T") c.T = parse_count(key, value);
    else if (key == "M") c.M = parse_count(key, value);
    else if (key == "t0") c.t0 = parse_count(key, value);
    else if (key == "T_mc") c.T_mc = parse_count(key, value);
    else if (key == "a") c.a = parse_real(key, value);
    else if (key == "b") c.b = parse_real(key, value);
    else if (key == "alpha") c.alpha = parse_real(key, value);
    else if (key == "beta") c.beta = parse_real(key, value);
    else if (key == "mu") c.mu = parse_real(key, value);
    else if (key == "R") c.R = parse_real(key, value);
    else if (key == "c") c.c = parse_real(key, value);
    else if (key == "L") c.L = parse_real(key, value);
    else if (key == "seed") c.seed = parse_seed(key, value);
    else if (key == "workers") c.workers = static_cast<unsigned>(parse_count(key, value));
    else if (key == "record_timing") c.record_timing = parse_flag(key, value);
    else if (key == "output") c.output = value;
    else if (key == "sampler") {
      try {
        c.sampler = parse_sampler(value);
      } catch (const std::invalid_argument& err) {
        throw ConfigError(key, "key 'sampler': " + std::string(err.what()));
      }
    }
  }
  if (!has("t0")) c.t0 = std::min(c.n, c.T);
  if (e == "datadep_convex" && !has("alpha")) c.alpha = c.mu / (2.0 * c.R * c.R);
  if (e == "prop1" && !has("mu")) {
    const double nd = static_cast<double>(c.n);
    c.mu = 1.0 / (nd * nd * nd * nd);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "experiment = " << c.experiment << "\n";
  out << "n = " << c.n << "\n";
  out << "d = " << c.d << "\n";
  out << "K = " << c.K << "\n";
  out << "T = " << c.T << "\n";
  out << "M = " << c.M << "\n";
  out << "t0 = " << c.t0 << "\n";
  out << "T_mc = " << c.T_mc << "\n";
  out << "a = " << format_real(c.a) << "\n";
  out << "b = " << format_real(c.b) << "\n";
  out << "alpha = " << format_real(c.alpha) << "\n";
  out << "beta = " << format_real(c.beta) << "\n";
  out << "mu = " << format_real(c.mu) << "\n";
  out << "R = " << format_real(c.R) << "\n";
  out << "c = " << format_real(c.c) << "\n";
  out << "L = " << format_real(c.L) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "sampler = " << to_string(c.sampler) << "\n";
  out << "output = " << c.output << "\n";
  out << "workers = " << c.workers << "\n";
  out << "record_timing = " << (c.record_timing ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace stablab
