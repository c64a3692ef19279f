#include "stablab/losses.hpp"

#include <cmath>
#include <limits>

namespace stablab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dims(const LossSpec& spec, const Vector& w, const LabeledSample& z) {
  if (w.size() != z.x.size()) {
    throw std::invalid_argument("loss: w has dimension " + std::to_string(w.size()) +
                                " but x has dimension " + std::to_string(z.x.size()));
  }
  std::visit(Overloaded{[&](const QuadraticLoss& q) {
                          if (static_cast<std::size_t>(w.size()) != q.A.dimension())
                            throw std::invalid_argument("loss: w does not match dimension of A");
                        },
                        [&](const HuberizedQuadraticLoss& h) {
                          if (static_cast<std::size_t>(w.size()) != h.A.dimension())
                            throw std::invalid_argument("loss: w does not match dimension of A");
                        },
                        [](const RegularizedLinearLoss&) {}},
             spec.family);
}

}  // namespace

// ---------------------------------------------------------------------------

double HuberizedQuadraticLoss::radius() const { return 1.0 / std::sqrt(A.min_stored_eigenvalue()); }

double HuberizedQuadraticLoss::energy_norm(const Vector& w) const {
  return (A.eigenvalues().cwiseSqrt().asDiagonal() * A.project(w)).norm();
}

double HuberizedQuadraticLoss::huber_lipschitz() const {
  return std::sqrt(A.eigenvalues().maxCoeff() / A.min_stored_eigenvalue());
}

double RegularizedLinearLoss::scalar_value(double u, double y) const {
  switch (family) {
    case ScalarFamily::Ridge:
      return 0.5 * (u - y) * (u - y);
  }
  return 0.0;
}

double RegularizedLinearLoss::scalar_derivative(double u, double y) const {
  switch (family) {
    case ScalarFamily::Ridge:
      return u - y;
  }
  return 0.0;
}

double RegularizedLinearLoss::scalar_second_derivative(double, double) const {
  switch (family) {
    case ScalarFamily::Ridge:
      return 1.0;
  }
  return 0.0;
}

std::string LossSpec::name() const {
  return std::visit(Overloaded{[](const QuadraticLoss&) { return std::string("quadratic"); },
                               [](const HuberizedQuadraticLoss&) { return std::string("huberized_quadratic"); },
                               [](const RegularizedLinearLoss&) { return std::string("ridge"); }},
                    family);
}

LossSpec make_quadratic(SpectralMatrix A) {
  LossConstants c;
  c.smoothness = A.norm();
  c.strong_convexity = std::max(0.0, A.min_eigenvalue());
  return LossSpec{QuadraticLoss{std::move(A)}, c};
}

LossSpec make_huberized(SpectralMatrix A) {
  if (!(A.min_stored_eigenvalue() > 0.0)) {
    throw std::invalid_argument("huberized loss: stored eigenvalues must be positive");
  }
  HuberizedQuadraticLoss h{std::move(A)};
  LossConstants c;
  c.lipschitz = h.huber_lipschitz();
  c.smoothness = h.A.max_eigenvalue();
  // The Hessian jumps across the region boundary.
  c.hessian_lipschitz = std::numeric_limits<double>::infinity();
  return LossSpec{std::move(h), c};
}

LossSpec make_ridge(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("ridge loss: mu must be >= 0");
  LossConstants c;
  c.smoothness = 1.0;
  c.strong_convexity = 1.0;
  c.regularizer = mu;
  return LossSpec{RegularizedLinearLoss{ScalarFamily::Ridge, mu}, c};
}

// ---------------------------------------------------------------------------

double loss_value(const LossSpec& spec, const Vector& w, const LabeledSample& z) {
  check_dims(spec, w, z);
  return std::visit(
      Overloaded{
          [&](const QuadraticLoss& q) { return 0.5 * w.dot(q.A.apply(w)) - z.y * z.x.dot(w); },
          [&](const HuberizedQuadraticLoss& h) {
            const double energy = h.energy_norm(w);
            const double r = h.radius();
            const double linear = z.y * z.x.dot(w);
            if (energy <= r) return 0.5 * energy * energy - linear;
            return r * (energy - 0.5 * r) - linear;
          },
          [&](const RegularizedLinearLoss& l) {
            return l.scalar_value(w.dot(z.x), z.y) + 0.5 * l.mu * w.squaredNorm();
          }},
      spec.family);
}

void loss_gradient_into(const LossSpec& spec, const Vector& w, const LabeledSample& z, Vector& out) {
  check_dims(spec, w, z);
  std::visit(Overloaded{
                 [&](const QuadraticLoss& q) { out = q.A.apply(w) - z.y * z.x; },
                 [&](const HuberizedQuadraticLoss& h) {
                   const Vector sqrt_eig = h.A.eigenvalues().cwiseSqrt();
                   const Vector p = sqrt_eig.asDiagonal() * h.A.project(w);
                   const double energy = p.norm();
                   const double r = h.radius();
                   if (energy <= r) {
                     out = h.A.apply(w) - z.y * z.x;
                   } else {
                     out = (r / energy) * (h.A.basis() * (sqrt_eig.asDiagonal() * p)) - z.y * z.x;
                   }
                 },
                 [&](const RegularizedLinearLoss& l) {
                   out = l.scalar_derivative(w.dot(z.x), z.y) * z.x + l.mu * w;
                 }},
             spec.family);
}

Vector loss_gradient(const LossSpec& spec, const Vector& w, const LabeledSample& z) {
  Vector g;
  loss_gradient_into(spec, w, z, g);
  return g;
}

double hessian_norm(const LossSpec& spec, const Vector& w, const LabeledSample& z) {
  check_dims(spec, w, z);
  return std::visit(
      Overloaded{
          [&](const QuadraticLoss& q) { return q.A.norm(); },
          [&](const HuberizedQuadraticLoss& h) {
            const Vector eig = h.A.eigenvalues();
            const Vector p = eig.cwiseSqrt().asDiagonal() * h.A.project(w);
            const double energy = p.norm();
            const double r = h.radius();
            if (energy <= r) return h.A.norm();
            // Outside: (r/|p|) B (I - p p^T/|p|^2) B^T with B = U Sigma^{1/2}; its nonzero
            // spectrum matches that of P Sigma P with P the projector orthogonal to p.
            const Vector unit = p / energy;
            const Matrix proj = Matrix::Identity(p.size(), p.size()) - unit * unit.transpose();
            const Matrix core = proj * eig.asDiagonal() * proj;
            const Vector spectrum = symmetric_eigenvalues(core);
            return (r / energy) * std::max(0.0, spectrum(spectrum.size() - 1));
          },
          [&](const RegularizedLinearLoss& l) {
            // f'' x x^T + mu I has top eigenvalue f'' |x|^2 + mu when f'' >= 0.
            const double curv = l.scalar_second_derivative(w.dot(z.x), z.y);
            return std::abs(curv * z.x.squaredNorm() + l.mu);
          }},
      spec.family);
}

double lipschitz_witness(const LossSpec& spec, const Vector& w, const LabeledSample& z) {
  if (const auto* l = std::get_if<RegularizedLinearLoss>(&spec.family)) {
    return std::abs(l->scalar_derivative(w.dot(z.x), z.y));
  }
  return loss_gradient(spec, w, z).norm();
}

Vector finite_diff_gradient(const LossSpec& spec, const Vector& w, const LabeledSample& z, double h) {
  return finite_diff_gradient([&](const Vector& u) { return loss_value(spec, u, z); }, w, h);
}

double curvature_proxy(const LossSpec& spec, const CurvatureInputs& in, const StepSchedule& schedule,
                       std::size_t t) {
  if (t == 0) throw std::invalid_argument("curvature_proxy: t starts at 1");
  if (in.gradients_s.size() + 1 < t || in.gradients_s_prime.size() + 1 < t) {
    throw std::invalid_argument("curvature_proxy: gradient histories must cover steps 1..t-1");
  }
  const double beta = spec.constants.smoothness;
  const double rho = spec.constants.hessian_lipschitz;
  double kappa = hessian_norm(spec, in.w0, in.z_t);
  if (rho > 0.0) {
    if (!std::isfinite(rho)) return beta;
    Vector drift_s = Vector::Zero(in.w0.size());
    Vector drift_sp = Vector::Zero(in.w0.size());
    for (std::size_t k = 1; k < t; ++k) {
      drift_s += schedule.at(k) * in.gradients_s[k - 1];
      drift_sp += schedule.at(k) * in.gradients_s_prime[k - 1];
    }
    kappa += 0.5 * rho * (drift_s.norm() + drift_sp.norm());
  }
  return std::min(beta, kappa);
}

}  // namespace stablab
