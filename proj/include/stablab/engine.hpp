#pragma once

// Coupled twin-dataset SGD: both runs consume one shared index sequence and
// differ only through the sample at the differing index.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stablab/instances.hpp"

namespace stablab {

enum class SamplerKind { UniformWithReplacement, Permutation };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler(const std::string& text);

/// Calls fn(k) for every k in [0, count) on up to `workers` threads; fn must only
/// write to state owned by slot k. The first exception thrown is rethrown.
void parallel_for_index(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Per-trial seed: splitmix64 of (base_seed, k).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t k);

/// Draws indices in [0, n). Permutation draws a fresh uniform permutation
/// every n steps.
class IndexSampler {
 public:
  IndexSampler(std::size_t n, SamplerKind kind, std::uint64_t seed);
  std::size_t next();

 private:
  std::size_t n_;
  SamplerKind kind_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
};

/// Index sequence of length T (zero-based indices, entry t-1 is used at step t).
std::vector<std::size_t> draw_index_sequence(std::size_t n, std::size_t T, SamplerKind kind,
                                             std::uint64_t seed);

inline constexpr double kOverflowThreshold = 1e12;

struct RunOptions {
  bool keep_iterates = false;
  /// Track max lipschitz_witness over training steps and test points.
  bool track_lipschitz = false;
  /// Called after every step with (t, w_t, w'_t).
  std::function<void(std::size_t, const Vector&, const Vector&)> observer;
};

struct TrajectoryPair {
  /// w_0..w_T when keep_iterates, otherwise only w_T.
  std::vector<Vector> w;
  std::vector<Vector> w_prime;
  /// ||Delta_t|| for t = 0..T (shorter if overflowed).
  std::vector<double> delta_norms;
  std::vector<std::size_t> index_sequence;
  /// First step t (1-based) with i_t = i.
  std::optional<std::size_t> hitting_time;
  bool overflowed = false;
  std::size_t steps_run = 0;
  double max_lipschitz = 0.0;
  /// For Huberized losses: max over both runs and all t of energy_norm / radius.
  double max_region_ratio = 0.0;

  const Vector& final_w() const { return w.back(); }
  const Vector& final_w_prime() const { return w_prime.back(); }
  double final_delta() const { return delta_norms.back(); }
};

TrajectoryPair run_twin_sgd(const Instance& instance, std::size_t T, SamplerKind sampler, std::uint64_t seed,
                            const RunOptions& options = {});

/// Runs on a given index sequence (T = indices.size()).
TrajectoryPair run_twin_sgd_on(const Instance& instance, const std::vector<std::size_t>& indices,
                               const RunOptions& options = {});

struct EstimateOptions {
  /// Worker threads; results do not depend on this value.
  unsigned workers = 1;
  bool keep_profile = false;
  bool track_lipschitz = false;
};

struct DivergenceStats {
  std::size_t trials = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t overflowed = 0;
  std::size_t attempts = 0;
  double acceptance_rate = 1.0;
  /// Mean of ||Delta_t|| for t = 0..T over non-overflowed trials (keep_profile only).
  std::vector<double> mean_profile;
  double max_lipschitz = 0.0;
  double max_region_ratio = 0.0;
  std::vector<std::string> warnings;
};

DivergenceStats estimate_divergence(const Instance& instance, std::size_t T, SamplerKind sampler, std::size_t M,
                                    std::uint64_t base_seed, const EstimateOptions& options = {});

struct HitCondition {
  enum class Kind { HitBy, HitAt };
  Kind kind = Kind::HitBy;
  std::size_t t = 1;

  static HitCondition hit_by(std::size_t t0) { return {Kind::HitBy, t0}; }
  static HitCondition hit_at(std::size_t t) { return {Kind::HitAt, t}; }
  bool accepts(std::optional<std::size_t> hitting_time) const;
};

/// Exact probability that a hitting time drawn from the sampler satisfies the condition.
double hit_condition_probability(std::size_t n, SamplerKind sampler, const HitCondition& condition);

inline constexpr double kMinAcceptance = 1e-4;

/// Rejection sampling on the index sequence; M accepted trials.
DivergenceStats estimate_conditional_divergence(const Instance& instance, std::size_t T, SamplerKind sampler,
                                                std::size_t M, const HitCondition& condition,
                                                std::uint64_t base_seed, const EstimateOptions& options = {});

struct StabilityEstimate {
  /// Mean of |f(w_T; z) - f(w'_T; z)| per test point.
  std::vector<double> per_point_mean;
  std::vector<double> per_point_stderr;
  std::size_t argmax = 0;
  double sup = 0.0;
  double stderr_at_argmax = 0.0;
  DivergenceStats divergence;
};

StabilityEstimate estimate_stability(const Instance& instance, std::size_t T, SamplerKind sampler, std::size_t M,
                                     std::uint64_t base_seed, const EstimateOptions& options = {});

struct HittingDistribution {
  /// cdf[t] = P[H <= t] for t = 0..T.
  std::vector<double> cdf;
  /// Standard errors of cdf entries (zero in exact mode).
  std::vector<double> stderr_;
  double never = 0.0;
  std::size_t trials = 0;
};

HittingDistribution hitting_time_distribution_exact(std::size_t n, SamplerKind sampler, std::size_t T);
HittingDistribution hitting_time_distribution_mc(std::size_t n, SamplerKind sampler, std::size_t T,
                                                 std::size_t M, std::uint64_t base_seed);

inline constexpr double kEnumerationCap = 2e6;

struct ExactDivergence {
  double mean = 0.0;
  /// Exact E||Delta_t|| for t = 0..T.
  std::vector<double> profile;
  std::size_t sequences = 0;
};

/// Exact average of ||Delta_T|| over all n^T uniform index sequences.
ExactDivergence enumerate_exact_divergence(const Instance& instance, std::size_t T,
                                           double cap = kEnumerationCap);

}  // namespace stablab
