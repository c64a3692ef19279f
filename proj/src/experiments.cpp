#include "stablab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "stablab/spectral.hpp"

namespace stablab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? sep : "") + parts[k];
  return out;
}

BoundParams base_params(std::size_t n, std::size_t T) {
  BoundParams p;
  p.n = static_cast<double>(n);
  p.T = static_cast<double>(T);
  return p;
}

/// Largest |y| among test points parallel to v; f(w; z) - f(w'; z) = -y v^T Delta for those.
double max_direction_label(const Instance& instance) {
  double best = 0.0;
  for (const auto& z : instance.test_points) {
    if ((z.x - instance.direction).norm() < kExactTolerance || (z.x + instance.direction).norm() < kExactTolerance) {
      best = std::max(best, std::abs(z.y));
    }
  }
  return best;
}

ResultRow make_row(const ExperimentConfig& c, const std::string& name, std::size_t n, std::size_t T,
                   const StepSchedule& schedule) {
  ResultRow row;
  row.experiment = name;
  row.n = n;
  row.T = T;
  row.schedule = schedule.describe();
  row.seed = c.seed;
  return row;
}

Instance nonconvex_instance(const ExperimentConfig& c, bool constant_step) {
  Instance inst = build_nonconvex(c.n, c.d, c.beta, c.a, constant_step);
  inst.schedule = constant_step ? StepSchedule::constant(c.a / (c.c * c.beta)) : StepSchedule::inverse_t(c.a, c.beta, c.c);
  return inst;
}

EstimateOptions estimate_options(const ExperimentConfig& c) {
  EstimateOptions o;
  o.workers = c.workers;
  return o;
}

// ---------------------------------------------------------------------------

std::vector<ResultRow> convex_lower(const ExperimentConfig& c) {
  const Instance inst = build_convex_lower(c.n, c.d, c.K, StepSchedule::constant(c.alpha));
  const auto est = estimate_stability(inst, c.T, c.sampler, c.M, c.seed, estimate_options(c));

  BoundParams p = base_params(c.n, c.T);
  p.L = inst.constants.lipschitz;
  p.schedule = inst.schedule;
  const auto lower = evaluate_bound(BoundKind::ConvexLower, p);
  const auto upper = evaluate_bound(BoundKind::ConvexUpperPrior, p);
  const double exact = instance_recursion(inst, c.T).back();

  ResultRow row = make_row(c, c.experiment, c.n, c.T, inst.schedule);
  row.trials = est.divergence.trials;
  row.mean_divergence = est.divergence.mean;
  row.stderr_ = est.divergence.stderr_;
  row.stability_estimate = est.sup;
  row.measured = est.sup;
  row.bound_lower = lower.value;
  row.bound_upper = upper.value;
  row.bound_names = {"convex_lower", "convex_upper_prior"};
  row.side_conditions = est.divergence.max_region_ratio <= 1.0 + kExactTolerance;
  row.note = "exact divergence " + fmt(exact) + "; max energy/radius " + fmt(est.divergence.max_region_ratio) +
             (row.side_conditions ? " (quadratic region held)" : " (left the quadratic region)");
  finish_row(row, est.stderr_at_argmax);
  return {row};
}

std::vector<ResultRow> strongly_convex_lower(const ExperimentConfig& c) {
  const Instance inst = build_strongly_convex_lower(c.n, c.d, c.beta);
  const auto est = estimate_stability(inst, c.T, c.sampler, c.M, c.seed, estimate_options(c));

  BoundParams p = base_params(c.n, c.T);
  p.gamma = inst.constants.strong_convexity;
  const auto lower = evaluate_bound(BoundKind::StronglyConvexLower, p);
  const double exact = instance_recursion(inst, c.T).back();

  ResultRow row = make_row(c, c.experiment, c.n, c.T, inst.schedule);
  row.trials = est.divergence.trials;
  row.mean_divergence = est.divergence.mean;
  row.stderr_ = est.divergence.stderr_;
  row.stability_estimate = est.sup;
  row.measured = est.sup;
  row.bound_lower = lower.value;
  row.bound_names = {"strongly_convex_lower"};
  row.note = "exact divergence " + fmt(exact);
  finish_row(row, est.stderr_at_argmax);
  return {row};
}

ResultRow nonconvex_stability_row(const ExperimentConfig& c, const Instance& inst, SamplerKind sampler,
                                  const std::string& name) {
  EstimateOptions o = estimate_options(c);
  o.track_lipschitz = true;
  const auto est = estimate_stability(inst, c.T, sampler, c.M, c.seed, o);

  BoundParams p = base_params(c.n, c.T);
  p.a = c.a;
  p.L = est.divergence.max_lipschitz;
  p.gap = hit_gap(inst) / std::abs(inst.twins.s()[inst.twins.differing_index()].y);
  const auto lower = evaluate_bound(BoundKind::NonconvexLower, p);
  const auto kind = sampler == SamplerKind::Permutation ? BoundKind::PermutationUpper : BoundKind::UniformUpper;
  const auto upper = evaluate_bound(kind, p);

  ResultRow row = make_row(c, name, c.n, c.T, inst.schedule);
  row.trials = est.divergence.trials;
  row.mean_divergence = est.divergence.mean;
  row.stderr_ = est.divergence.stderr_;
  row.stability_estimate = est.sup;
  row.measured = est.sup;
  row.bound_lower = lower.value;
  row.bound_upper = upper.value;
  row.bound_names = {"nonconvex_lower", to_string(kind)};
  row.note = "sampler " + to_string(sampler) + "; effective L " + fmt(*p.L) + "; factored lower " +
             fmt(*lower.factored_value);
  finish_row(row, est.stderr_at_argmax);
  return row;
}

std::vector<ResultRow> nonconvex_decreasing(const ExperimentConfig& c) {
  const Instance inst = nonconvex_instance(c, false);
  const auto cond = estimate_conditional_divergence(inst, c.T, c.sampler, c.M, HitCondition::hit_by(c.t0), c.seed,
                                                    estimate_options(c));
  BoundParams p = base_params(c.n, c.T);
  p.a = c.a;
  p.t0 = static_cast<double>(c.t0);
  const auto lower = evaluate_bound(BoundKind::NonconvexConditionalLower, p);

  ResultRow row = make_row(c, c.experiment + "/conditional", c.n, c.T, inst.schedule);
  row.trials = cond.trials;
  row.mean_divergence = cond.mean;
  row.stderr_ = cond.stderr_;
  row.measured = cond.mean;
  row.bound_lower = lower.value;
  row.bound_names = {"nonconvex_conditional_lower"};
  row.note = "condition H <= " + std::to_string(c.t0) + "; acceptance rate " + fmt(cond.acceptance_rate);
  finish_row(row, cond.stderr_);

  return {row, nonconvex_stability_row(c, inst, c.sampler, c.experiment)};
}

std::vector<ResultRow> nonconvex_constant(const ExperimentConfig& c) {
  const Instance inst = nonconvex_instance(c, true);
  const auto exact = instance_recursion(inst, std::max(c.T, c.T_mc));

  BoundParams p = base_params(c.n, c.T);
  p.a = c.a;
  const auto lower = evaluate_bound(BoundKind::ExponentialLower, p);
  ResultRow rec = make_row(c, c.experiment + "/recursion", c.n, c.T, inst.schedule);
  rec.mean_divergence = exact[c.T];
  rec.measured = exact[c.T];
  rec.bound_lower = lower.value;
  rec.bound_names = {"exponential_lower"};
  rec.note = "exact recursion";
  finish_row(rec, std::nullopt);

  const auto est = estimate_divergence(inst, c.T_mc, c.sampler, c.M, c.seed, estimate_options(c));
  ResultRow mc = make_row(c, c.experiment + "/monte_carlo", c.n, c.T_mc, inst.schedule);
  mc.trials = est.trials;
  mc.mean_divergence = est.mean;
  mc.stderr_ = est.stderr_;
  mc.measured = est.mean;
  mc.bound_lower = exact[c.T_mc];
  mc.bound_upper = exact[c.T_mc];
  mc.bound_names = {"recursion", "recursion"};
  mc.note = std::to_string(est.overflowed) + " overflowed trials";
  for (const auto& w : est.warnings) mc.note += "; " + w;
  finish_row(mc, est.stderr_);
  return {rec, mc};
}

std::vector<ResultRow> permutation_vs_uniform(const ExperimentConfig& c) {
  const Instance inst = nonconvex_instance(c, false);
  return {nonconvex_stability_row(c, inst, SamplerKind::UniformWithReplacement, c.experiment + "/uniform"),
          nonconvex_stability_row(c, inst, SamplerKind::Permutation, c.experiment + "/permutation")};
}

std::vector<ResultRow> datadep_convex(const ExperimentConfig& c) {
  const auto res = run_datadep_convex(c.n, c.d, c.T, c.M, c.mu, c.R, c.alpha, c.seed, c.sampler, c.workers);
  const auto schedule = StepSchedule::constant(c.alpha);

  ResultRow row = make_row(c, c.experiment, c.n, c.T, schedule);
  row.trials = res.trials;
  row.mean_divergence = res.mean_divergence;
  row.stderr_ = res.stderr_;
  row.stability_estimate = res.stability;
  row.measured = res.mean_divergence;
  row.bound_upper = *res.bound.divergence_value;
  row.bound_names = {"datadep_convex_upper"};
  row.note = "divergence form 4LR/(xi gamma n) with xi_hat " + fmt(res.xi_hat) + ", L " + fmt(res.lipschitz) +
             "; stability form " + fmt(res.bound.value);
  finish_row(row, res.stderr_);

  ResultRow knee = make_row(c, c.experiment + "/knee", c.n, c.T, schedule);
  knee.trials = res.trials;
  knee.mean_divergence = res.mean_divergence;
  knee.stderr_ = res.stderr_;
  knee.measured = res.knee_ratio;
  knee.bound_upper = 1.1;
  knee.bound_names = {"plateau_ratio"};
  knee.note = "max over [T/2, T] of mean divergence relative to its value at T/2";
  finish_row(knee, std::nullopt);
  return {row, knee};
}

std::vector<ResultRow> prop1(const ExperimentConfig& c) {
  const auto cert = inverse_rayleigh_expectation(SphericalGaussian{c.d}, c.n, c.mu, c.M, c.seed, 0.2, c.workers);
  ResultRow row = make_row(c, c.experiment, c.n, 0, StepSchedule::constant(0.0));
  row.schedule = "none";
  row.trials = cert.draws;
  row.mean_divergence = cert.estimate;
  row.stderr_ = cert.stderr_;
  row.measured = cert.estimate;
  row.bound_upper = cert.target;
  row.bound_names = {"inverse_rayleigh_target"};
  row.note = "d " + std::to_string(c.d) + ", mu " + fmt(c.mu) + "; certificate (mean + 2SE <= target) " +
             (cert.verdict ? "pass" : "fail") + ", margin " + fmt(cert.margin);
  finish_row(row, cert.stderr_);
  return {row};
}

std::vector<ResultRow> table1_sweep(const ExperimentConfig& c) {
  std::vector<ResultRow> rows;
  for (std::size_t n : {10, 100}) {
    for (std::size_t T : {100, 1000, 10000}) {
      {
        const Instance inst = build_strongly_convex_lower(n, 3, 1.0);
        ResultRow row = make_row(c, "table1_sweep/strongly_convex", n, T, inst.schedule);
        row.mean_divergence = instance_recursion(inst, T).back();
        row.measured = max_direction_label(inst) * row.mean_divergence;
        row.stability_estimate = row.measured;
        BoundParams p = base_params(n, T);
        p.gamma = inst.constants.strong_convexity;
        row.bound_lower = evaluate_bound(BoundKind::StronglyConvexLower, p).value;
        row.bound_names = {"strongly_convex_lower"};
        finish_row(row, std::nullopt);
        rows.push_back(row);
      }
      {
        const Instance inst = build_convex_lower(n, c.d, c.K, StepSchedule::constant(c.alpha));
        ResultRow row = make_row(c, "table1_sweep/convex", n, T, inst.schedule);
        row.mean_divergence = instance_recursion(inst, T).back();
        row.measured = max_direction_label(inst) * row.mean_divergence;
        row.stability_estimate = row.measured;
        BoundParams p = base_params(n, T);
        p.L = inst.constants.lipschitz;
        p.schedule = inst.schedule;
        row.bound_lower = evaluate_bound(BoundKind::ConvexLower, p).value;
        row.bound_upper = evaluate_bound(BoundKind::ConvexUpperPrior, p).value;
        row.bound_names = {"convex_lower", "convex_upper_prior"};
        finish_row(row, std::nullopt);
        rows.push_back(row);
      }
      ExperimentConfig nc = c;
      nc.n = n;
      nc.d = 3;
      {
        const Instance inst = nonconvex_instance(nc, false);
        ResultRow row = make_row(c, "table1_sweep/nonconvex", n, T, inst.schedule);
        row.mean_divergence = instance_recursion(inst, T).back();
        row.measured = max_direction_label(inst) * row.mean_divergence;
        row.stability_estimate = row.measured;
        BoundParams p = base_params(n, T);
        p.a = c.a;
        p.L = c.L;
        row.bound_lower = evaluate_bound(BoundKind::NonconvexLower, p).value;
        row.bound_upper = evaluate_bound(BoundKind::UniformUpper, p).value;
        row.bound_names = {"nonconvex_lower", "uniform_upper"};
        row.note = "L " + fmt(c.L) + "; permutation_upper " + fmt(evaluate_bound(BoundKind::PermutationUpper, p).value) +
                   ", prior_nonconvex_upper " + fmt(evaluate_bound(BoundKind::PriorNonconvexUpper, p).value);
        finish_row(row, std::nullopt);
        rows.push_back(row);
      }
      {
        Instance inst = nonconvex_instance(nc, false);
        inst.schedule = StepSchedule::harmonic(c.b);
        ResultRow row = make_row(c, "table1_sweep/datadep_nonconvex", n, T, inst.schedule);
        row.mean_divergence = instance_recursion(inst, T).back();
        row.measured = max_direction_label(inst) * row.mean_divergence;
        row.stability_estimate = row.measured;
        ZetaParams zp;
        zp.beta = c.beta;
        zp.b = c.b;
        zp.hessian_at_w0 = c.beta;
        BoundParams p = base_params(n, T);
        p.L = c.L;
        p.b = c.b;
        p.zeta = zeta_estimate(zp).value;
        row.bound_upper = evaluate_bound(BoundKind::DatadepUniformUpper, p).value;
        row.bound_names = {"datadep_uniform_upper"};
        row.note = "zeta " + fmt(*p.zeta) + "; lower bound open";
        finish_row(row, std::nullopt);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<ResultRow> oracle_crosscheck(const ExperimentConfig& c) {
  const Instance inst = build_convex_lower(c.n, c.d, c.K, StepSchedule::constant(c.alpha));
  const auto exact = enumerate_exact_divergence(inst, c.T);
  const auto rec = instance_recursion(inst, c.T);

  ResultRow row = make_row(c, c.experiment, c.n, c.T, inst.schedule);
  row.trials = exact.sequences;
  row.mean_divergence = exact.mean;
  row.measured = exact.mean;
  row.bound_lower = rec[c.T];
  row.bound_upper = rec[c.T];
  row.bound_names = {"recursion", "recursion"};
  row.note = "enumerated " + std::to_string(exact.sequences) + " sequences; |enumeration - recursion| = " +
             fmt(std::abs(exact.mean - rec[c.T]));
  finish_row(row, std::nullopt);

  ResultRow closed = make_row(c, c.experiment + "/sum_product", c.n, c.T, inst.schedule);
  closed.mean_divergence = rec[c.T];
  closed.measured = lemma2_lower_bound(direction_eigenvalue(inst), inst.schedule, c.n, hit_gap(inst), c.T + 1);
  closed.bound_lower = rec[c.T];
  closed.bound_upper = rec[c.T];
  closed.bound_names = {"recursion", "recursion"};
  closed.note = "closed sum-product at T+1 vs recursion at T";
  finish_row(closed, std::nullopt);
  return {row, closed};
}

}  // namespace

// ---------------------------------------------------------------------------

bool row_verdict(const ResultRow& row) {
  if (!row.side_conditions) return false;
  if (!std::isfinite(row.measured)) return false;
  if (row.bound_lower && row.measured < *row.bound_lower - row.tolerance) return false;
  if (row.bound_upper && row.measured > *row.bound_upper + row.tolerance) return false;
  return true;
}

void finish_row(ResultRow& row, std::optional<double> se) {
  if (se) {
    row.tolerance = 3.0 * *se;
    row.tolerance_kind = "3SE";
  } else {
    row.tolerance = kExactRowTolerance;
    row.tolerance_kind = "exact";
  }
  row.verdict = row_verdict(row);
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.experiment << "," << r.n << "," << r.T << "," << r.schedule << "," << r.trials << ","
        << fmt(r.mean_divergence) << "," << fmt(r.stderr_) << "," << fmt_opt(r.stability_estimate) << ","
        << fmt_opt(r.bound_lower) << "," << fmt_opt(r.bound_upper) << "," << join(r.bound_names, ";") << ","
        << (r.verdict ? "pass" : "fail") << "," << fmt_opt(r.wall_time_ms) << "," << r.seed << "\n";
  }
}

std::string verdict_line(const ResultRow& r) {
  std::ostringstream out;
  out << (r.verdict ? "PASS " : "FAIL ") << r.experiment << " n=" << r.n << " T=" << r.T
      << " measured=" << fmt(r.measured);
  if (r.bound_lower) out << " lower=" << fmt(*r.bound_lower);
  if (r.bound_upper) out << " upper=" << fmt(*r.bound_upper);
  out << " tol=" << r.tolerance_kind << "(" << fmt(r.tolerance) << ")";
  if (!r.note.empty()) out << " | " << r.note;
  return out.str();
}

void apply_env_overrides(ExperimentConfig& config) {
  const char* env = std::getenv("STABLAB_SEED");
  if (!env || !*env) return;
  try {
    std::size_t used = 0;
    const std::string text(env);
    if (text[0] == '-') throw std::invalid_argument("");
    const auto seed = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument("");
    config.seed = seed;
  } catch (const std::exception&) {
    throw ConfigError("seed", "STABLAB_SEED: expected an unsigned integer, got '" + std::string(env) + "'");
  }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  std::vector<ResultRow> rows;
  const std::string& e = config.experiment;
  if (e == "convex_lower") rows = convex_lower(config);
  else if (e == "strongly_convex_lower") rows = strongly_convex_lower(config);
  else if (e == "nonconvex_decreasing") rows = nonconvex_decreasing(config);
  else if (e == "nonconvex_constant") rows = nonconvex_constant(config);
  else if (e == "permutation_vs_uniform") rows = permutation_vs_uniform(config);
  else if (e == "datadep_convex") rows = datadep_convex(config);
  else if (e == "prop1") rows = prop1(config);
  else if (e == "table1_sweep") rows = table1_sweep(config);
  else if (e == "oracle_crosscheck") rows = oracle_crosscheck(config);
  if (config.record_timing) {
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : rows) r.wall_time_ms = ms;
  }
  return rows;
}

std::vector<ResultRow> run_oracle(const ExperimentConfig& c) {
  validate_config(c);
  std::optional<Instance> inst;
  const std::string& e = c.experiment;
  if (e == "convex_lower" || e == "oracle_crosscheck" || e == "table1_sweep") {
    inst = build_convex_lower(c.n, c.d, c.K, StepSchedule::constant(c.alpha));
  } else if (e == "strongly_convex_lower") {
    inst = build_strongly_convex_lower(c.n, c.d, c.beta);
  } else if (e == "nonconvex_decreasing" || e == "permutation_vs_uniform") {
    inst = nonconvex_instance(c, false);
  } else if (e == "nonconvex_constant") {
    inst = nonconvex_instance(c, true);
  } else {
    throw ConfigError("experiment", "oracle: experiment '" + e + "' has no enumerable twin construction");
  }
  const double total = std::pow(static_cast<double>(c.n), static_cast<double>(c.T));
  if (total > kEnumerationCap) {
    throw ConfigError("T", "key 'T': hypothesis n^T ≤ 2e6 (enumeration cap) violated (n^T = " + fmt(total) + ")");
  }
  const auto exact = enumerate_exact_divergence(*inst, c.T);
  const auto rec = instance_recursion(*inst, c.T);
  ResultRow row = make_row(c, "oracle/" + e, c.n, c.T, inst->schedule);
  row.trials = exact.sequences;
  row.mean_divergence = exact.mean;
  row.measured = exact.mean;
  row.bound_lower = rec[c.T];
  row.bound_upper = rec[c.T];
  row.bound_names = {"recursion", "recursion"};
  row.note = "|enumeration - recursion| = " + fmt(std::abs(exact.mean - rec[c.T]));
  finish_row(row, std::nullopt);
  return {row};
}

double direction_eigenvalue(const Instance& instance) {
  const Vector& v = instance.direction;
  return std::visit(Overloaded{[&](const QuadraticLoss& q) { return v.dot(q.A.apply(v)) / v.squaredNorm(); },
                               [&](const HuberizedQuadraticLoss& h) { return v.dot(h.A.apply(v)) / v.squaredNorm(); },
                               [](const RegularizedLinearLoss&) -> double {
                                 throw std::invalid_argument(
                                     "direction_eigenvalue: linear models have no fixed eigen-direction");
                               }},
                    instance.loss.family);
}

double hit_gap(const Instance& instance) {
  const std::size_t i = instance.twins.differing_index();
  const auto& z = instance.twins.s()[i];
  const auto& zp = instance.twins.s_prime()[i];
  return std::abs(z.y) * (z.x - zp.x).norm();
}

std::vector<double> instance_recursion(const Instance& instance, std::size_t T) {
  return recursion_lemma1(direction_eigenvalue(instance), instance.schedule, instance.twins.size(),
                          hit_gap(instance), T);
}

DatadepResult run_datadep_convex(std::size_t n, std::size_t d, std::size_t T, std::size_t M, double mu, double R,
                                 double alpha, std::uint64_t seed, SamplerKind sampler, unsigned workers) {
  if (M == 0 || T < 2) throw std::invalid_argument("run_datadep_convex: need M >= 1 and T >= 2");
  struct Trial {
    std::vector<double> profile;
    double stability = 0.0;
    double inv_xi = 0.0;
    double lipschitz = 0.0;
    double gamma = 1.0;
  };
  std::vector<Trial> trials(M);
  GaussianLinearOptions options;
  options.schedule = StepSchedule::constant(alpha);
  parallel_for_index(M, workers, [&](std::size_t k) {
    const Instance inst = build_gaussian_linear(n, d, mu, R, derive_seed(seed, 2 * k), options);
    const auto run = run_twin_sgd(inst, T, sampler, derive_seed(seed, 2 * k + 1));
    Trial& t = trials[k];
    t.profile = run.delta_norms;
    for (const auto& z : inst.test_points) {
      t.stability += std::abs(loss_value(inst.loss, run.final_w(), z) - loss_value(inst.loss, run.final_w_prime(), z));
    }
    t.stability /= static_cast<double>(inst.test_points.size());
    t.gamma = inst.constants.strong_convexity;
    t.inv_xi = 1.0 / (rayleigh_xi(inst.twins.s()) + mu / t.gamma);
    t.lipschitz = inst.constants.lipschitz;
  });

  DatadepResult res;
  res.trials = M;
  res.mean_profile.assign(T + 1, 0.0);
  double inv_xi = 0.0, sum_div = 0.0, sum_stab = 0.0;
  for (const auto& t : trials) {
    for (std::size_t k = 0; k <= T; ++k) res.mean_profile[k] += t.profile[k];
    inv_xi += t.inv_xi;
    sum_div += t.profile[T];
    sum_stab += t.stability;
    res.lipschitz = std::max(res.lipschitz, t.lipschitz);
    res.gamma = t.gamma;
  }
  const double m = static_cast<double>(M);
  for (auto& v : res.mean_profile) v /= m;
  res.mean_divergence = sum_div / m;
  res.stability = sum_stab / m;
  double ss_div = 0.0, ss_stab = 0.0;
  for (const auto& t : trials) {
    ss_div += (t.profile[T] - res.mean_divergence) * (t.profile[T] - res.mean_divergence);
    ss_stab += (t.stability - res.stability) * (t.stability - res.stability);
  }
  if (M > 1) {
    res.stderr_ = std::sqrt(ss_div / (m - 1.0) / m);
    res.stability_stderr = std::sqrt(ss_stab / (m - 1.0) / m);
  }
  res.xi_hat = m / inv_xi;

  BoundParams p;
  p.n = static_cast<double>(n);
  p.L = res.lipschitz;
  p.R = R;
  p.xi = res.xi_hat;
  p.gamma = res.gamma;
  res.bound = evaluate_bound(BoundKind::DatadepConvexUpper, p);

  const std::size_t half = T / 2;
  double peak = res.mean_profile[half];
  for (std::size_t t = half; t <= T; ++t) peak = std::max(peak, res.mean_profile[t]);
  res.knee_ratio = res.mean_profile[half] > 0.0 ? peak / res.mean_profile[half] : 1.0;
  return res;
}

}  // namespace stablab
