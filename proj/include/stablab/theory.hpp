#pragma once

// Divergence recursions and closed-form stability bounds, evaluated with
// their printed constants. log is the natural logarithm throughout.

#include <optional>
#include <string>
#include <vector>

#include "stablab/core.hpp"

namespace stablab {

/// E||Delta_t|| for t = 0..T under
///   E||Delta_t|| = (1 - alpha_t lambda) E||Delta_{t-1}|| + alpha_t gap / n,  Delta_0 = 0.
/// Negative lambda gives the expansive (1 + alpha_t |lambda|) form. Requires alpha_t lambda <= 1.
std::vector<double> recursion_lemma1(double lambda, const StepSchedule& schedule, std::size_t n, double gap,
                                     std::size_t T);

/// (gap/n) sum_{t=1}^{T-1} alpha_t prod_{tau=t+1}^{T-1} (1 - alpha_tau lambda).
double lemma2_lower_bound(double lambda, const StepSchedule& schedule, std::size_t n, double gap, std::size_t T);

enum class BoundKind {
  ConvexLower,
  ConvexUpperPrior,
  StronglyConvexLower,
  NonconvexLower,
  NonconvexConditionalLower,
  PermutationUpper,
  UniformUpper,
  PriorNonconvexUpper,
  DatadepPermutationUpper,
  DatadepUniformUpper,
  DatadepConvexUpper,
  ExponentialLower,
  BurnInProbability,
};

enum class BoundSide { Lower, Upper };

std::string to_string(BoundKind kind);
std::string to_string(BoundSide side);
BoundKind parse_bound_kind(const std::string& name);
std::vector<BoundKind> all_bound_kinds();

struct BoundParams {
  std::optional<double> n, T, L, beta, gamma, a, b, zeta, xi, R, mu, t0;
  /// ||x_i - x_i'|| for the factored non-convex lower bound.
  std::optional<double> gap;
  /// Constant in front of T^{a/(1+a)}/n; defaults to 2 L^2.
  std::optional<double> prior_constant;
  std::optional<StepSchedule> schedule;
};

struct BoundReport {
  BoundKind kind;
  BoundSide side;
  double value = 0.0;
  /// Divergence form where the kind has one (permutation_upper, datadep_convex_upper).
  std::optional<double> divergence_value;
  /// Value multiplied by gap (nonconvex_lower with gap supplied).
  std::optional<double> factored_value;
  std::string formula;
  BoundParams params;
};

BoundReport evaluate_bound(BoundKind kind, const BoundParams& params);

struct ZetaParams {
  double beta = 0.0;
  double rho = 0.0;
  double b = 0.0;
  double sigma = 0.0;
  double hessian_at_w0 = 0.0;
  double excess_risk_at_w0 = 0.0;
  double hidden_constant = 1.0;
};

struct ZetaResult {
  double value = 0.0;
  bool clamped = false;
  std::string warning;
};

/// hidden_constant * min{beta, hessian_at_w0 + rho (b sigma + sqrt(b excess_risk))}.
ZetaResult zeta_estimate(const ZetaParams& zp);

struct GrowthCheck {
  double x_T = 0.0;
  double lower_bound = 0.0;
  bool holds = false;
};

/// Iterates x_{t+1} = (1 + a/(0.99 t)) x_t + y/t from x_{t0} = 0 and compares x_T with y (T/t0)^a.
GrowthCheck growth_recursion_check(double a, double y, std::size_t t0, std::size_t T);

struct HittingProbabilityCheck {
  /// P[Delta_{t_prev} = 0 | Delta_{t_cur} != 0] under uniform sampling.
  double exact_zero_given_hit = 0.0;
  double zero_bound = 0.0;  // n / (n + t_prev)
  /// P[Delta_{t_prev} != 0 | Delta_{t_cur} != 0].
  double exact_hit_given_hit = 0.0;
  double hit_bound = 0.0;  // (1/c)(1 + t_cur/n)
  bool holds = false;
};

/// c = t_cur / t_prev must exceed 1.
HittingProbabilityCheck hitting_probability_bounds(std::size_t n, std::size_t t_prev, std::size_t t_cur);

}  // namespace stablab
