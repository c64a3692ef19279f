#include "stablab/theory.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stablab {
namespace {

struct KindInfo {
  BoundKind kind;
  const char* name;
  BoundSide side;
};

constexpr std::array<KindInfo, 13> kKinds = {{
    {BoundKind::ConvexLower, "convex_lower", BoundSide::Lower},
    {BoundKind::ConvexUpperPrior, "convex_upper_prior", BoundSide::Upper},
    {BoundKind::StronglyConvexLower, "strongly_convex_lower", BoundSide::Lower},
    {BoundKind::NonconvexLower, "nonconvex_lower", BoundSide::Lower},
    {BoundKind::NonconvexConditionalLower, "nonconvex_conditional_lower", BoundSide::Lower},
    {BoundKind::PermutationUpper, "permutation_upper", BoundSide::Upper},
    {BoundKind::UniformUpper, "uniform_upper", BoundSide::Upper},
    {BoundKind::PriorNonconvexUpper, "prior_nonconvex_upper", BoundSide::Upper},
    {BoundKind::DatadepPermutationUpper, "datadep_permutation_upper", BoundSide::Upper},
    {BoundKind::DatadepUniformUpper, "datadep_uniform_upper", BoundSide::Upper},
    {BoundKind::DatadepConvexUpper, "datadep_convex_upper", BoundSide::Upper},
    {BoundKind::ExponentialLower, "exponential_lower", BoundSide::Lower},
    {BoundKind::BurnInProbability, "burn_in_probability", BoundSide::Lower},
}};

const KindInfo& info(BoundKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw std::invalid_argument("unknown bound kind");
}

void check_schedule(double lambda, const StepSchedule& schedule, std::size_t n, std::size_t T) {
  if (n == 0) throw std::invalid_argument("recursion: n must be >= 1");
  for (std::size_t t = 1; t <= T; ++t) {
    if (schedule.at(t) * lambda > 1.0) {
      throw std::invalid_argument("recursion: alpha_t lambda <= 1 violated at t = " + std::to_string(t));
    }
  }
}

class Getter {
 public:
  Getter(BoundKind kind, const BoundParams& p) : kind_(kind), p_(p) {}

  double operator()(const std::optional<double>& v, const char* symbol) const {
    if (!v) {
      throw std::invalid_argument(std::string("evaluate_bound(") + info(kind_).name + "): missing parameter '" +
                                  symbol + "'");
    }
    if (!std::isfinite(*v)) {
      throw std::invalid_argument(std::string("evaluate_bound(") + info(kind_).name + "): parameter '" + symbol +
                                  "' is not finite");
    }
    return *v;
  }

  double positive(const std::optional<double>& v, const char* symbol) const {
    const double x = (*this)(v, symbol);
    if (!(x > 0.0)) {
      throw std::invalid_argument(std::string("evaluate_bound(") + info(kind_).name + "): parameter '" + symbol +
                                  "' must be positive");
    }
    return x;
  }

  const StepSchedule& schedule() const {
    if (!p_.schedule) {
      throw std::invalid_argument(std::string("evaluate_bound(") + info(kind_).name +
                                  "): missing parameter 'alpha' (step schedule)");
    }
    return *p_.schedule;
  }

 private:
  BoundKind kind_;
  const BoundParams& p_;
};

std::size_t as_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

std::vector<double> recursion_lemma1(double lambda, const StepSchedule& schedule, std::size_t n, double gap,
                                     std::size_t T) {
  check_schedule(lambda, schedule, n, T);
  std::vector<double> e(T + 1, 0.0);
  const double nd = static_cast<double>(n);
  for (std::size_t t = 1; t <= T; ++t) {
    const double alpha = schedule.at(t);
    e[t] = (1.0 - alpha * lambda) * e[t - 1] + alpha * gap / nd;
  }
  return e;
}

double lemma2_lower_bound(double lambda, const StepSchedule& schedule, std::size_t n, double gap, std::size_t T) {
  if (T == 0) throw std::invalid_argument("lemma2_lower_bound: T must be >= 1");
  check_schedule(lambda, schedule, n, T);
  double total = 0.0;
  for (std::size_t t = 1; t + 1 <= T; ++t) {
    double prod = 1.0;
    for (std::size_t tau = t + 1; tau + 1 <= T; ++tau) prod *= 1.0 - schedule.at(tau) * lambda;
    total += schedule.at(t) * prod;
  }
  return gap / static_cast<double>(n) * total;
}

std::string to_string(BoundKind kind) { return info(kind).name; }

std::string to_string(BoundSide side) { return side == BoundSide::Lower ? "lower" : "upper"; }

BoundKind parse_bound_kind(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  std::string known;
  for (const auto& k : kKinds) known += std::string(known.empty() ? "" : ", ") + k.name;
  throw std::invalid_argument("unknown bound kind '" + name + "' (known: " + known + ")");
}

std::vector<BoundKind> all_bound_kinds() {
  std::vector<BoundKind> out;
  for (const auto& k : kKinds) out.push_back(k.kind);
  return out;
}

BoundReport evaluate_bound(BoundKind kind, const BoundParams& p) {
  const Getter get(kind, p);
  BoundReport r{kind, info(kind).side, 0.0, std::nullopt, std::nullopt, "", p};

  switch (kind) {
    case BoundKind::ConvexLower:
    case BoundKind::ConvexUpperPrior: {
      const double L = get.positive(p.L, "L");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      const double sum = get.schedule().sum(as_count(T));
      if (kind == BoundKind::ConvexLower) {
        r.value = L / (2.0 * n) * sum;
        r.formula = "(L/2n) sum_t alpha_t";
      } else {
        r.value = L / n * sum;
        r.formula = "(L/n) sum_t alpha_t";
      }
      break;
    }
    case BoundKind::StronglyConvexLower: {
      const double gamma = get.positive(p.gamma, "gamma");
      const double n = get.positive(p.n, "n");
      r.value = 1.0 / (16.0 * gamma * n);
      r.formula = "1/(16 gamma n)";
      break;
    }
    case BoundKind::NonconvexLower: {
      const double a = get.positive(p.a, "a");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      r.value = std::pow(T, a) / (6.0 * std::pow(n, 1.0 + a));
      if (p.gap) r.factored_value = r.value * get(p.gap, "gap");
      r.formula = "T^a/(6 n^(1+a))";
      break;
    }
    case BoundKind::NonconvexConditionalLower: {
      const double a = get.positive(p.a, "a");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      const double t0 = get.positive(p.t0, "t0");
      r.value = std::pow(T / t0, a) / (2.0 * n);
      r.formula = "(1/2n)(T/t0)^a";
      break;
    }
    case BoundKind::PermutationUpper:
    case BoundKind::UniformUpper: {
      const double L = get.positive(p.L, "L");
      const double a = get.positive(p.a, "a");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      const double shape = std::pow(T, a) / std::pow(n, 1.0 + a);
      if (kind == BoundKind::PermutationUpper) {
        r.value = 2.0 * L * L * shape;
        r.divergence_value = 2.0 * L * shape;
        r.formula = "2 L^2 T^a/n^(1+a)";
      } else {
        r.value = 16.0 * std::log(n) * L * L * shape;
        r.formula = "16 log(n) L^2 T^a/n^(1+a)";
      }
      break;
    }
    case BoundKind::PriorNonconvexUpper: {
      const double a = get.positive(p.a, "a");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      double constant = 0.0;
      if (p.prior_constant) {
        constant = get.positive(p.prior_constant, "prior_constant");
      } else {
        const double L = get.positive(p.L, "L");
        constant = 2.0 * L * L;
      }
      r.value = constant * std::pow(T, a / (1.0 + a)) / n;
      r.formula = "C T^(a/(1+a))/n";
      break;
    }
    case BoundKind::DatadepPermutationUpper:
    case BoundKind::DatadepUniformUpper: {
      const double L = get.positive(p.L, "L");
      const double zeta = get.positive(p.zeta, "zeta");
      const double b = get.positive(p.b, "b");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      const double shape = L * L * std::pow(T, zeta * b) / (zeta * std::pow(n, 1.0 + zeta * b));
      if (kind == BoundKind::DatadepPermutationUpper) {
        r.value = shape;
        r.formula = "L^2 T^(zeta b)/(zeta n^(1+zeta b))";
      } else {
        r.value = 16.0 * std::log(n) * shape;
        r.formula = "16 log(n) L^2 T^(zeta b)/(zeta n^(1+zeta b))";
      }
      break;
    }
    case BoundKind::DatadepConvexUpper: {
      const double L = get.positive(p.L, "L");
      const double R = get.positive(p.R, "R");
      const double xi = get.positive(p.xi, "xi");
      const double gamma = get.positive(p.gamma, "gamma");
      const double n = get.positive(p.n, "n");
      r.value = 16.0 * L * L * R * R / (xi * gamma * n);
      r.divergence_value = 4.0 * L * R / (xi * gamma * n);
      r.formula = "16 L^2 R^2/(xi gamma n)";
      break;
    }
    case BoundKind::ExponentialLower: {
      const double a = get.positive(p.a, "a");
      const double n = get.positive(p.n, "n");
      const double T = get.positive(p.T, "T");
      r.value = std::exp(a * T / 2.0) / (n * n);
      r.formula = "exp(aT/2)/n^2";
      break;
    }
    case BoundKind::BurnInProbability: {
      const double n = get.positive(p.n, "n");
      r.value = 1.0 - std::pow(1.0 - 1.0 / n, n);
      r.formula = "1-(1-1/n)^n";
      break;
    }
  }
  return r;
}

ZetaResult zeta_estimate(const ZetaParams& zp) {
  for (double v : {zp.beta, zp.rho, zp.b, zp.sigma, zp.hessian_at_w0, zp.excess_risk_at_w0, zp.hidden_constant}) {
    if (!std::isfinite(v)) throw std::invalid_argument("zeta_estimate: parameters must be finite");
  }
  ZetaResult out;
  double excess = zp.excess_risk_at_w0;
  if (excess < 0.0) {
    std::ostringstream msg;
    msg << "zeta_estimate: negative excess risk " << excess << " clamped to 0";
    out.warning = msg.str();
    out.clamped = true;
    excess = 0.0;
  }
  const double drift = zp.rho * (zp.b * zp.sigma + std::sqrt(zp.b * excess));
  out.value = zp.hidden_constant * std::min(zp.beta, zp.hessian_at_w0 + drift);
  return out;
}

GrowthCheck growth_recursion_check(double a, double y, std::size_t t0, std::size_t T) {
  if (!(a > 0.0 && a <= 0.1)) throw std::invalid_argument("growth_recursion_check: need a in (0, 0.1]");
  if (t0 == 0) throw std::invalid_argument("growth_recursion_check: need t0 >= 1");
  if (T < t0) throw std::invalid_argument("growth_recursion_check: need T >= t0");
  double x = 0.0;
  for (std::size_t t = t0; t < T; ++t) {
    const double td = static_cast<double>(t);
    x = (1.0 + a / (0.99 * td)) * x + y / td;
  }
  GrowthCheck out;
  out.x_T = x;
  out.lower_bound = y * std::pow(static_cast<double>(T) / static_cast<double>(t0), a);
  out.holds = out.x_T >= out.lower_bound;
  return out;
}

HittingProbabilityCheck hitting_probability_bounds(std::size_t n, std::size_t t_prev, std::size_t t_cur) {
  if (n < 2) throw std::invalid_argument("hitting_probability_bounds: need n >= 2");
  if (t_prev == 0) throw std::invalid_argument("hitting_probability_bounds: need t_prev >= 1");
  if (t_cur <= t_prev) throw std::invalid_argument("hitting_probability_bounds: need c = t_cur/t_prev > 1");
  const double nd = static_cast<double>(n);
  const double q = 1.0 - 1.0 / nd;
  const double miss_prev = std::pow(q, static_cast<double>(t_prev));
  const double miss_cur = std::pow(q, static_cast<double>(t_cur));
  const double c = static_cast<double>(t_cur) / static_cast<double>(t_prev);

  HittingProbabilityCheck out;
  out.exact_zero_given_hit = (miss_prev - miss_cur) / (1.0 - miss_cur);
  out.zero_bound = nd / (nd + static_cast<double>(t_prev));
  out.exact_hit_given_hit = (1.0 - miss_prev) / (1.0 - miss_cur);
  out.hit_bound = (1.0 + static_cast<double>(t_cur) / nd) / c;
  out.holds = out.exact_zero_given_hit <= out.zero_bound && out.exact_hit_given_hit <= out.hit_bound;
  return out;
}

}  // namespace stablab
