#pragma once

// Flat key = value experiment configuration.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablab/engine.hpp"

namespace stablab {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::string experiment;
  std::size_t n = 10;
  std::size_t d = 5;
  std::size_t K = 3;
  std::size_t T = 100;
  std::size_t M = 2000;
  std::size_t t0 = 10;
  /// Monte Carlo horizon for nonconvex_constant.
  std::size_t T_mc = 80;
  double a = 0.05;
  double b = 0.01;
  double alpha = 0.05;
  double beta = 1.0;
  double mu = 1e-3;
  double R = 2.0;
  double c = 0.99;
  /// Lipschitz constant assumed by table1_sweep upper bounds.
  double L = 0.5;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::UniformWithReplacement;
  std::string output;
  unsigned workers = 1;
  bool record_timing = false;

  bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& config_keys();

/// Parses and validates; experiment-specific defaults are filled in.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Every key, one per line; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& config);

/// Re-checks the experiment's preconditions; throws ConfigError.
void validate_config(const ExperimentConfig& config);

}  // namespace stablab
