#pragma once

// Rayleigh-quotient floors of datasets and Monte Carlo certificates of the
// inversely bounded condition E[1/(xi_S + mu)] <= 1/(xi + mu).

#include <cstdint>
#include <istream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "stablab/core.hpp"

namespace stablab {

/// Tight xi_S: the smallest nonzero eigenvalue of (1/n) sum x_j x_j^T.
double rayleigh_xi(const Dataset& s);
double rayleigh_xi(std::span<const Vector> features);

struct SphericalGaussian {
  std::size_t d;
};

/// x_j = e_{j mod d}; deterministic.
struct CycledBasis {
  std::size_t d;
};

/// x = U D g with g ~ N(0, I_k), U a d x k orthonormal-column matrix, D = diag(scales).
struct TransformedGaussian {
  Matrix U;
  Vector scales;
};

using FeatureSampler = std::variant<SphericalGaussian, CycledBasis, TransformedGaussian>;

std::vector<Vector> draw_features(const FeatureSampler& sampler, std::size_t n, std::mt19937_64& rng);

struct RayleighCertificate {
  /// xi_S of the first draw (exact for deterministic samplers).
  double xi_s = 0.0;
  double mu = 0.0;
  std::size_t draws = 0;
  std::size_t n = 0;
  /// Monte Carlo mean of 1/(xi_S + mu) and its standard error.
  double estimate = 0.0;
  double stderr_ = 0.0;
  double candidate_xi = 0.0;
  double target = 0.0;  // 1/(candidate_xi + mu)
  /// target - (estimate + 2 SE); nonnegative iff the certificate passes.
  double margin = 0.0;
  bool verdict = false;
};

inline constexpr std::size_t kMinCertificateDraws = 100;

RayleighCertificate inverse_rayleigh_expectation(const FeatureSampler& sampler, std::size_t n, double mu,
                                                 std::size_t M, std::uint64_t seed, double candidate_xi,
                                                 unsigned workers = 1);

/// Spherical Gaussian certificate with mu = n^-4 and candidate xi = 1/5.
/// Requires d > 10 and n >= 2d.
RayleighCertificate prop1_check(std::size_t d, std::size_t n, std::size_t M, std::uint64_t seed,
                                unsigned workers = 1);

/// One sample per row: features then label, separated by commas or whitespace.
/// Blank lines and lines starting with '#' are skipped, as is a non-numeric header row.
Dataset read_delimited_dataset(std::istream& in);
Dataset read_delimited_dataset(const std::string& path);

}  // namespace stablab
