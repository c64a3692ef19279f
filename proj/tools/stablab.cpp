// stablab: run twin-dataset SGD experiments, evaluate bounds, certify datasets.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "stablab/config.hpp"
#include "stablab/experiments.hpp"
#include "stablab/spectral.hpp"
#include "stablab/theory.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int report(const std::vector<stablab::ResultRow>& rows, const std::string& csv_path) {
  bool all = true;
  for (const auto& r : rows) {
    std::cout << stablab::verdict_line(r) << "\n";
    all = all && r.verdict;
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) {
      std::cerr << "error: cannot write '" << csv_path << "'\n";
      return kExitConfig;
    }
    stablab::write_csv(rows, out);
    std::cout << "wrote " << csv_path << "\n";
  }
  return all ? kExitPass : kExitFail;
}

stablab::ExperimentConfig load(const std::string& path, unsigned workers) {
  auto config = stablab::load_config(path);
  stablab::apply_env_overrides(config);
  if (workers > 0) config.workers = workers;
  return config;
}

int cmd_run(const std::string& path, const std::string& csv, unsigned workers) {
  const auto config = load(path, workers);
  std::string out = csv.empty() ? config.output : csv;
  if (out.empty()) out = config.experiment + ".csv";
  return report(stablab::run_experiment(config), out);
}

int cmd_oracle(const std::string& path, const std::string& csv) {
  const auto config = load(path, 0);
  return report(stablab::run_oracle(config), csv);
}

int cmd_bounds(const std::string& kind_name, const std::vector<std::string>& assignments) {
  const auto kind = stablab::parse_bound_kind(kind_name);
  stablab::BoundParams p;
  std::map<std::string, std::optional<double>*> slots = {
      {"n", &p.n},         {"T", &p.T},         {"L", &p.L},   {"beta", &p.beta}, {"gamma", &p.gamma},
      {"a", &p.a},         {"b", &p.b},         {"zeta", &p.zeta}, {"xi", &p.xi}, {"R", &p.R},
      {"mu", &p.mu},       {"t0", &p.t0},       {"gap", &p.gap}, {"C", &p.prior_constant}};
  for (const auto& kv : assignments) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bounds: expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    double x = 0.0;
    try {
      std::size_t used = 0;
      x = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bounds: parameter '" + key + "' is not a number: '" + value + "'");
    }
    if (key == "alpha") {
      p.schedule = stablab::StepSchedule::constant(x);
    } else if (auto it = slots.find(key); it != slots.end()) {
      *it->second = x;
    } else {
      throw std::invalid_argument("bounds: unknown parameter '" + key + "'");
    }
  }
  const auto r = stablab::evaluate_bound(kind, p);
  std::cout << stablab::to_string(r.kind) << " " << stablab::to_string(r.side) << " " << fmt(r.value);
  if (r.divergence_value) std::cout << " divergence_form=" << fmt(*r.divergence_value);
  if (r.factored_value) std::cout << " factored=" << fmt(*r.factored_value);
  std::cout << "  [" << r.formula << "]\n";
  return kExitPass;
}

int cmd_rayleigh(const std::string& path, double mu, std::optional<double> xi) {
  const auto data = stablab::read_delimited_dataset(path);
  const double xi_s = stablab::rayleigh_xi(data);
  std::cout << "n=" << data.size() << " d=" << data.dimension() << " xi_S=" << fmt(xi_s)
            << " inverse=" << fmt(1.0 / (xi_s + mu)) << " mu=" << fmt(mu) << "\n";
  if (xi) {
    const bool ok = xi_s >= *xi;
    std::cout << (ok ? "PASS" : "FAIL") << " xi_S >= " << fmt(*xi) << "\n";
    return ok ? kExitPass : kExitFail;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-dataset SGD stability laboratory"};
  app.require_subcommand(1);

  std::string config_path, csv_path;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "key = value config file")->required();
  run->add_option("--csv", csv_path, "CSV output path (overrides the config's output key)");
  run->add_option("--workers", workers, "Worker threads (results do not depend on this)");

  std::string oracle_path, oracle_csv;
  auto* oracle = app.add_subcommand("oracle", "Exact enumeration vs recursion for a config's construction");
  oracle->add_option("config", oracle_path, "key = value config file")->required();
  oracle->add_option("--csv", oracle_csv, "CSV output path");

  std::string kind;
  std::vector<std::string> assignments;
  auto* bounds = app.add_subcommand("bounds", "Evaluate a closed-form bound, e.g. bounds nonconvex_lower a=0.05 n=10 T=1000");
  bounds->add_option("kind", kind, "Bound kind")->required();
  bounds->add_option("params", assignments, "key=value parameters (alpha=... gives a constant step)");

  std::string data_path;
  double mu = 0.0;
  std::optional<double> xi;
  auto* rayleigh = app.add_subcommand("rayleigh", "Rayleigh floor of a delimited dataset (features then label)");
  rayleigh->add_option("data", data_path, "Data file")->required();
  rayleigh->add_option("--mu", mu, "Regularizer weight")->required();
  rayleigh->add_option("--xi", xi, "Candidate floor to check against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, csv_path, workers);
    if (*oracle) return cmd_oracle(oracle_path, oracle_csv);
    if (*bounds) return cmd_bounds(kind, assignments);
    if (*rayleigh) return cmd_rayleigh(data_path, mu, xi);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitConfig;
}
