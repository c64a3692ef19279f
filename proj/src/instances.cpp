#include "stablab/instances.hpp"

#include <cmath>
#include <random>

namespace stablab {
namespace {

constexpr double kTwinLabel = 0.5;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

double max_label_feature_norm(const TwinPair& twins, const std::vector<LabeledSample>& tests) {
  double m = 0.0;
  for (const auto* ds : {&twins.s(), &twins.s_prime()}) {
    for (const auto& z : ds->samples()) m = std::max(m, std::abs(z.y) * z.x.norm());
  }
  for (const auto& z : tests) m = std::max(m, std::abs(z.y) * z.x.norm());
  return m;
}

/// S, S' with z_0 = (v, 0.5), z_0' = (-v, 0.5) and the given off-index samples.
TwinPair opposite_twins(const Vector& v, std::vector<LabeledSample> rest) {
  std::vector<LabeledSample> s;
  s.reserve(rest.size() + 1);
  s.push_back({v, kTwinLabel});
  for (auto& z : rest) s.push_back(std::move(z));
  return TwinPair::replace(Dataset(std::move(s)), 0, {-v, kTwinLabel});
}

}  // namespace

std::string to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::ConvexLower:
      return "convex_lower";
    case ConstructionKind::StronglyConvexLower:
      return "strongly_convex_lower";
    case ConstructionKind::NonConvexDecreasing:
      return "nonconvex_decreasing";
    case ConstructionKind::NonConvexConstant:
      return "nonconvex_constant";
    case ConstructionKind::GaussianLinear:
      return "gaussian_linear";
  }
  return "unknown";
}

Instance build_convex_lower(std::size_t n, std::size_t d, std::size_t K, StepSchedule schedule) {
  require(K >= 2, "convex_lower: need K >= 2");
  require(d > K, "convex_lower: need K < d so that v can sit in the null space of A");
  require(n >= 2, "convex_lower: need n >= 2");

  Matrix U = Matrix::Zero(d, K);
  for (std::size_t k = 0; k < K; ++k) U(k, k) = 1.0;
  Vector eig = Vector::Ones(K);
  eig(0) = 2.0;
  const Vector v = basis_vector(d, d - 1);

  // Off-index features cycle over the lambda_K = 1 eigenvectors e_1..e_{K-1}. On that
  // eigenspace each step is a convex combination of the iterate and a unit vector, so
  // SGD never leaves the quadratic region.
  std::vector<LabeledSample> rest;
  for (std::size_t j = 1; j < n; ++j) rest.push_back({basis_vector(d, 1 + (j - 1) % (K - 1)), 1.0});
  TwinPair twins = opposite_twins(v, std::move(rest));

  std::vector<LabeledSample> tests = {
      {v, 2.0}, {v, 1.0}, {basis_vector(d, 0), 1.0}, {basis_vector(d, 1), 1.0}};

  LossSpec loss = make_huberized(SpectralMatrix(U, eig));
  const double lipschitz = loss.constants.lipschitz + max_label_feature_norm(twins, tests);
  loss.constants.lipschitz = lipschitz;

  InstanceConstants c;
  c.lipschitz = lipschitz;
  c.smoothness = loss.constants.smoothness;
  c.strong_convexity = 0.0;
  return Instance{ConstructionKind::ConvexLower, std::move(loss), std::move(twins), schedule,
                  std::move(tests), c, v, Vector::Zero(d)};
}

Instance build_strongly_convex_lower(std::size_t n, std::size_t d, double beta) {
  require(d >= 2, "strongly_convex_lower: need d >= 2");
  require(n >= 2, "strongly_convex_lower: need n >= 2");
  require(beta > 0.0, "strongly_convex_lower: need beta > 0");

  const double gamma = 0.5 * beta;
  Vector diag = Vector::Constant(d, beta);
  diag(d - 1) = gamma;
  const Vector v = basis_vector(d, d - 1);

  std::vector<LabeledSample> rest;
  for (std::size_t j = 1; j < n; ++j) rest.push_back({basis_vector(d, (j - 1) % (d - 1)), kTwinLabel});
  TwinPair twins = opposite_twins(v, std::move(rest));

  std::vector<LabeledSample> tests = {{v, 1.0}, {basis_vector(d, 0), 1.0}};

  InstanceConstants c;
  c.smoothness = beta;
  c.strong_convexity = gamma;
  return Instance{ConstructionKind::StronglyConvexLower,
                  make_quadratic(SpectralMatrix::diagonal(diag)),
                  std::move(twins),
                  StepSchedule::constant(1.0 / (2.0 * beta)),
                  std::move(tests),
                  c,
                  v,
                  Vector::Zero(d)};
}

Instance build_nonconvex(std::size_t n, std::size_t d, double beta, double a, bool constant_step) {
  require(d >= 2, "nonconvex: need d >= 2");
  require(n >= 2, "nonconvex: need n >= 2");
  require(beta > 0.0, "nonconvex: need beta > 0");
  require(a > 0.0 && a <= 0.1, "nonconvex: need 0 < a <= 0.1 (the lower bound requires a < 0.1)");

  Vector diag = Vector::Constant(d, beta);
  diag(d - 1) = -beta;
  const Vector v = basis_vector(d, d - 1);

  std::vector<LabeledSample> rest;
  for (std::size_t j = 1; j < n; ++j) rest.push_back({basis_vector(d, (j - 1) % (d - 1)), kTwinLabel});
  TwinPair twins = opposite_twins(v, std::move(rest));

  std::vector<LabeledSample> tests = {{v, 1.0}, {basis_vector(d, 0), 1.0}};

  InstanceConstants c;
  c.smoothness = beta;
  c.a = a;
  const auto kind = constant_step ? ConstructionKind::NonConvexConstant : ConstructionKind::NonConvexDecreasing;
  const auto schedule = constant_step ? StepSchedule::constant(a / (0.99 * beta))
                                      : StepSchedule::inverse_t(a, beta, 0.99);
  return Instance{kind,
                  make_quadratic(SpectralMatrix::diagonal(diag)),
                  std::move(twins),
                  schedule,
                  std::move(tests),
                  c,
                  v,
                  Vector::Zero(d)};
}

double gaussian_linear_step_cap(double mu, double beta, double R) { return mu / (2.0 * beta * beta * R * R); }

Instance build_gaussian_linear(std::size_t n, std::size_t d, double mu, double R, std::uint64_t seed,
                               const GaussianLinearOptions& options) {
  require(d >= 1, "gaussian_linear: need d >= 1");
  require(n >= 2 * d, "gaussian_linear: need n >= 2d");
  require(R > 0.0, "gaussian_linear: need R > 0");
  const double nd = static_cast<double>(n);
  require(mu >= 1.0 / (nd * nd * nd * nd), "gaussian_linear: need mu >= gamma / n^4");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&] {
    Vector x(d);
    for (std::size_t k = 0; k < d; ++k) x(k) = normal(rng);
    return x;
  };

  Vector planted = gaussian();
  planted.normalize();

  auto draw = [&] {
    Vector x = gaussian();
    if (options.truncate && x.norm() > R) x *= R / x.norm();
    const double y = x.dot(planted) + options.label_noise * normal(rng);
    return LabeledSample{std::move(x), y};
  };

  std::vector<LabeledSample> samples;
  samples.reserve(n);
  for (std::size_t j = 0; j < n; ++j) samples.push_back(draw());
  LabeledSample replacement = draw();
  std::vector<LabeledSample> tests;
  for (int k = 0; k < 8; ++k) tests.push_back(draw());

  TwinPair twins = TwinPair::replace(Dataset(std::move(samples)), 0, std::move(replacement));

  double max_label = 0.0;
  for (const auto* ds : {&twins.s(), &twins.s_prime()}) {
    for (const auto& z : ds->samples()) max_label = std::max(max_label, std::abs(z.y));
  }
  for (const auto& z : tests) max_label = std::max(max_label, std::abs(z.y));

  LossSpec loss = make_ridge(mu);
  InstanceConstants c;
  c.smoothness = loss.constants.smoothness;
  c.strong_convexity = loss.constants.strong_convexity;
  c.feature_radius = R;
  // |f_y'(w^T x)| = |w^T x - y| <= |w| R + |y| on the unit ball in w.
  c.lipschitz_ball = 1.0;
  c.lipschitz = R + max_label;
  loss.constants.lipschitz = c.lipschitz;

  const StepSchedule schedule =
      options.schedule.value_or(StepSchedule::constant(gaussian_linear_step_cap(mu, c.smoothness, R)));
  return Instance{ConstructionKind::GaussianLinear,
                  std::move(loss),
                  std::move(twins),
                  schedule,
                  std::move(tests),
                  c,
                  planted,
                  Vector::Zero(d)};
}

}  // namespace stablab
