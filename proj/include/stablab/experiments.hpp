#pragma once

// Named experiments: each builds its construction, runs the estimators and
// compares the measurement with the evaluated bounds.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stablab/config.hpp"
#include "stablab/engine.hpp"
#include "stablab/instances.hpp"
#include "stablab/theory.hpp"

namespace stablab {

struct ResultRow {
  std::string experiment;
  std::size_t n = 0;
  std::size_t T = 0;
  std::string schedule;
  std::size_t trials = 0;
  double mean_divergence = 0.0;
  double stderr_ = 0.0;
  std::optional<double> stability_estimate;
  std::optional<double> bound_lower;
  std::optional<double> bound_upper;
  std::vector<std::string> bound_names;
  bool verdict = false;
  std::optional<double> wall_time_ms;
  std::uint64_t seed = 0;

  /// Quantity compared with the bounds, and the slack allowed on each side.
  double measured = 0.0;
  double tolerance = 0.0;
  /// "3SE" for Monte Carlo rows, "exact" otherwise.
  std::string tolerance_kind;
  /// Extra conditions (e.g. region invariants); the row fails if false.
  bool side_conditions = true;
  std::string note;
};

inline constexpr double kExactRowTolerance = 1e-12;

/// lower - tol <= measured <= upper + tol, and side_conditions.
bool row_verdict(const ResultRow& row);
/// Fills tolerance and verdict. se is the standard error of `measured` (Monte Carlo rows).
void finish_row(ResultRow& row, std::optional<double> se);

inline constexpr const char* kCsvHeader =
    "experiment,n,T,schedule,trials,mean_divergence,stderr,stability_estimate,bound_lower,bound_upper,"
    "bound_names,verdict,wall_time_ms,seed";

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::string verdict_line(const ResultRow& row);

/// Replaces config.seed with STABLAB_SEED when that variable is set.
void apply_env_overrides(ExperimentConfig& config);

std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Enumeration oracle vs recursion for the config's construction.
std::vector<ResultRow> run_oracle(const ExperimentConfig& config);

/// Eigenvalue of A along the instance's direction v, i.e. v^T A v.
double direction_eigenvalue(const Instance& instance);
/// |y_i| ||x_i - x_i'||: the divergence injected by one hit.
double hit_gap(const Instance& instance);
/// Exact E||Delta_t||, t = 0..T, for the lower-bound constructions.
std::vector<double> instance_recursion(const Instance& instance, std::size_t T);

struct DatadepResult {
  std::size_t trials = 0;
  double mean_divergence = 0.0;
  double stderr_ = 0.0;
  /// On-average stability: mean over trials and test points of |f(w_T; z) - f(w'_T; z)|.
  double stability = 0.0;
  double stability_stderr = 0.0;
  std::vector<double> mean_profile;
  /// 1 / mean over draws of 1/(xi_S + mu/gamma).
  double xi_hat = 0.0;
  double lipschitz = 0.0;
  double gamma = 1.0;
  BoundReport bound;
  /// max_{t in [T/2, T]} profile[t] / profile[T/2].
  double knee_ratio = 0.0;
};

/// Ridge twins over spherical Gaussian features; every trial redraws the dataset.
DatadepResult run_datadep_convex(std::size_t n, std::size_t d, std::size_t T, std::size_t M, double mu, double R,
                                 double alpha, std::uint64_t seed, SamplerKind sampler, unsigned workers = 1);

}  // namespace stablab
