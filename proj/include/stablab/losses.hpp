#pragma once

// Loss families used by the twin-dataset constructions. Each family gives a
// per-sample value f(w; z), its analytic gradient, the spectral norm of its
// Hessian, and a set of declared regularity constants.

#include <span>
#include <string>
#include <variant>

#include "stablab/core.hpp"

namespace stablab {

/// Declared regularity constants. Zero means "not present" for gamma, rho, mu.
struct LossConstants {
  double lipschitz = 0.0;          // L
  double smoothness = 0.0;         // beta
  double strong_convexity = 0.0;   // gamma
  double hessian_lipschitz = 0.0;  // rho
  double regularizer = 0.0;        // mu
};

/// f(w; z) = 1/2 w^T A w - y x^T w.
struct QuadraticLoss {
  SpectralMatrix A;
};

/// Quadratic inside the energy ball ||Sigma^{1/2} U^T w|| <= r, r = 1/sqrt(lambda_K),
/// continued linearly in the energy norm outside it:
///   r (||Sigma^{1/2} U^T w|| - r/2) - y x^T w.
struct HuberizedQuadraticLoss {
  SpectralMatrix A;  // all stored eigenvalues must be positive

  double radius() const;
  /// ||Sigma^{1/2} U^T w||.
  double energy_norm(const Vector& w) const;
  bool inside(const Vector& w) const { return energy_norm(w) <= radius(); }
  /// Lipschitz constant of the Huber part alone: sqrt(lambda_1 / lambda_K).
  double huber_lipschitz() const;
};

/// Scalar families f_y(u) for linear models.
enum class ScalarFamily { Ridge };  // Ridge: f_y(u) = (u - y)^2 / 2

/// Per-sample form f_y(w^T x) + (mu/2) w^T w.
struct RegularizedLinearLoss {
  ScalarFamily family = ScalarFamily::Ridge;
  double mu = 0.0;

  double scalar_value(double u, double y) const;
  double scalar_derivative(double u, double y) const;
  double scalar_second_derivative(double u, double y) const;
};

using LossFamily = std::variant<QuadraticLoss, HuberizedQuadraticLoss, RegularizedLinearLoss>;

struct LossSpec {
  LossFamily family;
  LossConstants constants;

  std::string name() const;
};

LossSpec make_quadratic(SpectralMatrix A);
LossSpec make_huberized(SpectralMatrix A);
LossSpec make_ridge(double mu);

double loss_value(const LossSpec& spec, const Vector& w, const LabeledSample& z);
Vector loss_gradient(const LossSpec& spec, const Vector& w, const LabeledSample& z);
/// Writes the gradient into out (resized as needed); avoids allocation in SGD loops.
void loss_gradient_into(const LossSpec& spec, const Vector& w, const LabeledSample& z, Vector& out);
/// ||grad^2 f(w; z)||_2.
double hessian_norm(const LossSpec& spec, const Vector& w, const LabeledSample& z);

/// The local quantity the family's declared L bounds: |f_y'(w^T x)| for
/// linear families, ||grad f(w; z)|| otherwise.
double lipschitz_witness(const LossSpec& spec, const Vector& w, const LabeledSample& z);

/// Central-difference gradient of loss_value in w.
Vector finite_diff_gradient(const LossSpec& spec, const Vector& w, const LabeledSample& z,
                            double h = 1e-5);

/// Inputs of the expansion-rate proxy psi_t = min{beta, kappa_t} with
///   kappa_t = ||grad^2 f(w_0; z_t)|| + rho/2 ||sum_{k<t} alpha_k g_k|| + rho/2 ||sum_{k<t} alpha_k g'_k||.
/// gradients_s[k-1] and gradients_s_prime[k-1] hold the step-k gradients of the two runs.
struct CurvatureInputs {
  Vector w0;
  LabeledSample z_t;
  std::span<const Vector> gradients_s;
  std::span<const Vector> gradients_s_prime;
};

double curvature_proxy(const LossSpec& spec, const CurvatureInputs& in, const StepSchedule& schedule,
                       std::size_t t);

}  // namespace stablab
