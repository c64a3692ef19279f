#pragma once

// Builders for the twin-dataset constructions. Each returns a loss, the twin
// pair, a step schedule, a test set for stability estimation, the special
// eigen-direction v along which the twins differ, and declared constants.
//
// All eigen-directions are standard basis vectors: v = e_{d-1} (zero-based)
// and every off-index feature lies in span{e_0, ..., e_{d-2}}, so the
// orthogonality conditions hold exactly.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablab/core.hpp"
#include "stablab/losses.hpp"

namespace stablab {

enum class ConstructionKind {
  ConvexLower,
  StronglyConvexLower,
  NonConvexDecreasing,
  NonConvexConstant,
  GaussianLinear,
};

std::string to_string(ConstructionKind kind);

struct InstanceConstants {
  double lipschitz = 0.0;
  double smoothness = 0.0;
  double strong_convexity = 0.0;
  std::optional<double> a;
  std::optional<double> b;
  /// Bound R on ||x|| (GaussianLinear).
  std::optional<double> feature_radius;
  /// Radius of the w-ball over which a local Lipschitz constant is declared.
  std::optional<double> lipschitz_ball;
};

struct Instance {
  ConstructionKind kind;
  LossSpec loss;
  TwinPair twins;
  StepSchedule schedule;
  std::vector<LabeledSample> test_points;
  InstanceConstants constants;
  Vector direction;  // v
  Vector w0;
};

/// Huberized rank-K quadratic with lambda_1 = 2 and every other eigenvalue
/// equal to lambda_K = 1; v in the null space of A.
/// Off-index samples are (u, 1) with u cycling over the lambda_K-eigenvectors.
Instance build_convex_lower(std::size_t n, std::size_t d, std::size_t K,
                            StepSchedule schedule = StepSchedule::constant(0.05));

/// Positive definite A with eigenvalue beta on span{e_0..e_{d-2}} and
/// gamma = beta/2 on v. Step 1/(2 beta).
Instance build_strongly_convex_lower(std::size_t n, std::size_t d, double beta);

/// Indefinite A with eigenvalue -beta on v and +beta elsewhere. Decreasing
/// step a/(0.99 beta t), or the constant a/(0.99 beta) when constant_step.
Instance build_nonconvex(std::size_t n, std::size_t d, double beta, double a, bool constant_step);

struct GaussianLinearOptions {
  double label_noise = 0.1;
  /// Step size; defaults to the cap mu / (2 beta^2 R^2) with beta = 1.
  std::optional<StepSchedule> schedule;
  /// Rescale features with ||x|| > R onto the sphere of radius R.
  bool truncate = true;
};

/// Ridge loss over spherical Gaussian features; S' replaces sample 0 with an
/// independent draw. Requires n >= 2d.
Instance build_gaussian_linear(std::size_t n, std::size_t d, double mu, double R, std::uint64_t seed,
                               const GaussianLinearOptions& options = {});

/// mu / (2 beta^2 R^2): the largest step covered by the data-dependent convex bound.
double gaussian_linear_step_cap(double mu, double beta, double R);

}  // namespace stablab
