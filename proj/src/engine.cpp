#include "stablab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace stablab {
namespace {

struct TrialSummary {
  double delta = 0.0;
  bool overflowed = false;
  double lipschitz = 0.0;
  double region = 0.0;
  std::vector<double> profile;
  std::vector<double> test_diffs;
};

template <class Result, class Fn>
std::vector<Result> run_indexed(std::size_t count, unsigned workers, Fn fn) {
  std::vector<Result> results(count);
  parallel_for_index(count, workers, [&](std::size_t k) { results[k] = fn(k); });
  return results;
}

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double m = static_cast<double>(xs.size());
  se = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
}

double witness_from_gradient(const LossSpec& loss, const Vector& w, const LabeledSample& z, const Vector& g) {
  if (const auto* l = std::get_if<RegularizedLinearLoss>(&loss.family)) {
    return std::abs(l->scalar_derivative(w.dot(z.x), z.y));
  }
  return g.norm();
}

TrialSummary summarize(const Instance& instance, const TrajectoryPair& run, bool keep_profile, bool stability) {
  TrialSummary s;
  s.delta = run.final_delta();
  s.overflowed = run.overflowed;
  s.lipschitz = run.max_lipschitz;
  s.region = run.max_region_ratio;
  if (keep_profile) s.profile = run.delta_norms;
  if (stability && !run.overflowed) {
    for (const auto& z : instance.test_points) {
      s.test_diffs.push_back(
          std::abs(loss_value(instance.loss, run.final_w(), z) - loss_value(instance.loss, run.final_w_prime(), z)));
    }
  }
  return s;
}

DivergenceStats reduce(const std::vector<TrialSummary>& trials, std::size_t T, bool keep_profile) {
  DivergenceStats stats;
  std::vector<double> finite;
  finite.reserve(trials.size());
  if (keep_profile) stats.mean_profile.assign(T + 1, 0.0);
  for (const auto& t : trials) {
    stats.max_lipschitz = std::max(stats.max_lipschitz, t.lipschitz);
    stats.max_region_ratio = std::max(stats.max_region_ratio, t.region);
    if (t.overflowed) {
      ++stats.overflowed;
      continue;
    }
    finite.push_back(t.delta);
    if (keep_profile) {
      for (std::size_t k = 0; k <= T; ++k) stats.mean_profile[k] += t.profile[k];
    }
  }
  stats.trials = trials.size();
  stats.attempts = trials.size();
  mean_and_stderr(finite, stats.mean, stats.stderr_);
  if (keep_profile && !finite.empty()) {
    for (auto& v : stats.mean_profile) v /= static_cast<double>(finite.size());
  }
  if (stats.overflowed > 0) {
    stats.warnings.push_back(std::to_string(stats.overflowed) + " of " + std::to_string(trials.size()) +
                             " trials overflowed (||Delta|| > 1e12); mean is over finite trials");
  }
  return stats;
}

void check_trials(std::size_t T, std::size_t M) {
  if (T == 0) throw std::invalid_argument("engine: T must be >= 1");
  if (M == 0) throw std::invalid_argument("engine: M must be >= 1");
}

std::vector<TrialSummary> run_seeded(const Instance& instance, std::size_t T, SamplerKind sampler,
                                     const std::vector<std::uint64_t>& seeds, const EstimateOptions& options,
                                     bool stability) {
  RunOptions run_options;
  run_options.track_lipschitz = options.track_lipschitz;
  return run_indexed<TrialSummary>(seeds.size(), options.workers, [&](std::size_t k) {
    const auto run = run_twin_sgd(instance, T, sampler, seeds[k], run_options);
    return summarize(instance, run, options.keep_profile, stability);
  });
}

std::vector<std::uint64_t> trial_seeds(std::uint64_t base_seed, std::size_t M) {
  std::vector<std::uint64_t> seeds(M);
  for (std::size_t k = 0; k < M; ++k) seeds[k] = derive_seed(base_seed, k);
  return seeds;
}

}  // namespace

void parallel_for_index(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string to_string(SamplerKind kind) {
  return kind == SamplerKind::Permutation ? "permutation" : "uniform";
}

SamplerKind parse_sampler(const std::string& text) {
  if (text == "uniform" || text == "uniform_with_replacement") return SamplerKind::UniformWithReplacement;
  if (text == "permutation") return SamplerKind::Permutation;
  throw std::invalid_argument("unknown sampler '" + text + "' (expected uniform or permutation)");
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t k) {
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

IndexSampler::IndexSampler(std::size_t n, SamplerKind kind, std::uint64_t seed) : n_(n), kind_(kind), rng_(seed) {
  if (n == 0) throw std::invalid_argument("IndexSampler: n must be >= 1");
  if (kind_ == SamplerKind::Permutation) {
    perm_.resize(n_);
    pos_ = n_;
  }
}

std::size_t IndexSampler::next() {
  if (kind_ == SamplerKind::UniformWithReplacement) {
    return std::uniform_int_distribution<std::size_t>(0, n_ - 1)(rng_);
  }
  if (pos_ == n_) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::shuffle(perm_.begin(), perm_.end(), rng_);
    pos_ = 0;
  }
  return perm_[pos_++];
}

std::vector<std::size_t> draw_index_sequence(std::size_t n, std::size_t T, SamplerKind kind, std::uint64_t seed) {
  IndexSampler sampler(n, kind, seed);
  std::vector<std::size_t> seq(T);
  for (auto& idx : seq) idx = sampler.next();
  return seq;
}

// ---------------------------------------------------------------------------

TrajectoryPair run_twin_sgd_on(const Instance& instance, const std::vector<std::size_t>& indices,
                               const RunOptions& options) {
  if (indices.empty()) throw std::invalid_argument("run_twin_sgd: T must be >= 1");
  const auto& s = instance.twins.s();
  const auto& sp = instance.twins.s_prime();
  const std::size_t n = s.size();
  const std::size_t target = instance.twins.differing_index();
  const auto* huber = std::get_if<HuberizedQuadraticLoss>(&instance.loss.family);

  TrajectoryPair out;
  out.index_sequence = indices;
  out.delta_norms.reserve(indices.size() + 1);

  Vector w = instance.w0;
  Vector wp = instance.w0;
  Vector g, gp;
  out.delta_norms.push_back((w - wp).norm());
  if (options.keep_iterates) {
    out.w.push_back(w);
    out.w_prime.push_back(wp);
  }
  auto track_region = [&] {
    if (!huber) return;
    const double r = huber->radius();
    out.max_region_ratio = std::max({out.max_region_ratio, huber->energy_norm(w) / r, huber->energy_norm(wp) / r});
  };
  track_region();

  for (std::size_t t = 1; t <= indices.size(); ++t) {
    const std::size_t idx = indices[t - 1];
    if (idx >= n) throw std::invalid_argument("run_twin_sgd: index out of range");
    if (idx == target && !out.hitting_time) out.hitting_time = t;
    const double alpha = instance.schedule.at(t);
    loss_gradient_into(instance.loss, w, s[idx], g);
    loss_gradient_into(instance.loss, wp, sp[idx], gp);
    if (options.track_lipschitz) {
      out.max_lipschitz = std::max({out.max_lipschitz, witness_from_gradient(instance.loss, w, s[idx], g),
                                    witness_from_gradient(instance.loss, wp, sp[idx], gp)});
    }
    w.noalias() -= alpha * g;
    wp.noalias() -= alpha * gp;
    const double d = (w - wp).norm();
    out.steps_run = t;
    out.delta_norms.push_back(d);
    if (!std::isfinite(d) || d > kOverflowThreshold) {
      out.overflowed = true;
      break;
    }
    track_region();
    if (options.keep_iterates) {
      out.w.push_back(w);
      out.w_prime.push_back(wp);
    }
    if (options.observer) options.observer(t, w, wp);
  }

  if (options.track_lipschitz && !out.overflowed) {
    for (const auto& z : instance.test_points) {
      out.max_lipschitz = std::max(
          {out.max_lipschitz, lipschitz_witness(instance.loss, w, z), lipschitz_witness(instance.loss, wp, z)});
    }
  }
  if (!options.keep_iterates) {
    out.w.push_back(std::move(w));
    out.w_prime.push_back(std::move(wp));
  }
  return out;
}

TrajectoryPair run_twin_sgd(const Instance& instance, std::size_t T, SamplerKind sampler, std::uint64_t seed,
                            const RunOptions& options) {
  if (T == 0) throw std::invalid_argument("run_twin_sgd: T must be >= 1");
  return run_twin_sgd_on(instance, draw_index_sequence(instance.twins.size(), T, sampler, seed), options);
}

// ---------------------------------------------------------------------------

DivergenceStats estimate_divergence(const Instance& instance, std::size_t T, SamplerKind sampler, std::size_t M,
                                    std::uint64_t base_seed, const EstimateOptions& options) {
  check_trials(T, M);
  const auto trials = run_seeded(instance, T, sampler, trial_seeds(base_seed, M), options, false);
  return reduce(trials, T, options.keep_profile);
}

bool HitCondition::accepts(std::optional<std::size_t> hitting_time) const {
  if (!hitting_time) return false;
  return kind == Kind::HitBy ? *hitting_time <= t : *hitting_time == t;
}

double hit_condition_probability(std::size_t n, SamplerKind sampler, const HitCondition& condition) {
  if (n == 0) throw std::invalid_argument("hit_condition_probability: n must be >= 1");
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(condition.t);
  if (sampler == SamplerKind::UniformWithReplacement) {
    const double q = 1.0 - 1.0 / nd;
    if (condition.kind == HitCondition::Kind::HitBy) return 1.0 - std::pow(q, td);
    return condition.t == 0 ? 0.0 : std::pow(q, td - 1.0) / nd;
  }
  if (condition.kind == HitCondition::Kind::HitBy) return std::min(td / nd, 1.0);
  return (condition.t >= 1 && condition.t <= n) ? 1.0 / nd : 0.0;
}

DivergenceStats estimate_conditional_divergence(const Instance& instance, std::size_t T, SamplerKind sampler,
                                                std::size_t M, const HitCondition& condition,
                                                std::uint64_t base_seed, const EstimateOptions& options) {
  check_trials(T, M);
  if (condition.t > T) throw std::invalid_argument("estimate_conditional_divergence: need t0 <= T");
  const std::size_t n = instance.twins.size();
  const double p = hit_condition_probability(n, sampler, condition);
  if (p < kMinAcceptance) {
    throw std::runtime_error("estimate_conditional_divergence: acceptance probability " + std::to_string(p) +
                             " is below the floor 1e-4");
  }

  // Only the first condition.t indices decide acceptance.
  const std::size_t prefix = std::min(T, condition.t);
  std::vector<std::uint64_t> accepted;
  accepted.reserve(M);
  std::size_t attempts = 0;
  while (accepted.size() < M) {
    const std::uint64_t seed = derive_seed(base_seed, attempts++);
    IndexSampler draw(n, sampler, seed);
    std::optional<std::size_t> hit;
    for (std::size_t t = 1; t <= prefix && !hit; ++t) {
      if (draw.next() == instance.twins.differing_index()) hit = t;
    }
    if (condition.accepts(hit)) accepted.push_back(seed);
    if (attempts >= 10000 && static_cast<double>(accepted.size()) < kMinAcceptance * static_cast<double>(attempts)) {
      throw std::runtime_error("estimate_conditional_divergence: observed acceptance rate below 1e-4 after " +
                               std::to_string(attempts) + " attempts");
    }
  }

  const auto trials = run_seeded(instance, T, sampler, accepted, options, false);
  auto stats = reduce(trials, T, options.keep_profile);
  stats.attempts = attempts;
  stats.acceptance_rate = static_cast<double>(M) / static_cast<double>(attempts);
  return stats;
}

StabilityEstimate estimate_stability(const Instance& instance, std::size_t T, SamplerKind sampler, std::size_t M,
                                     std::uint64_t base_seed, const EstimateOptions& options) {
  check_trials(T, M);
  if (instance.test_points.empty()) throw std::invalid_argument("estimate_stability: empty test set");
  const auto trials = run_seeded(instance, T, sampler, trial_seeds(base_seed, M), options, true);

  StabilityEstimate est;
  est.divergence = reduce(trials, T, options.keep_profile);
  const std::size_t P = instance.test_points.size();
  est.per_point_mean.assign(P, 0.0);
  est.per_point_stderr.assign(P, 0.0);
  std::vector<double> column;
  column.reserve(trials.size());
  for (std::size_t p = 0; p < P; ++p) {
    column.clear();
    for (const auto& t : trials) {
      if (!t.overflowed) column.push_back(t.test_diffs[p]);
    }
    mean_and_stderr(column, est.per_point_mean[p], est.per_point_stderr[p]);
  }
  for (std::size_t p = 0; p < P; ++p) {
    if (est.per_point_mean[p] > est.per_point_mean[est.argmax]) est.argmax = p;
  }
  est.sup = est.per_point_mean[est.argmax];
  est.stderr_at_argmax = est.per_point_stderr[est.argmax];
  return est;
}

// ---------------------------------------------------------------------------

HittingDistribution hitting_time_distribution_exact(std::size_t n, SamplerKind sampler, std::size_t T) {
  if (n == 0) throw std::invalid_argument("hitting_time_distribution: n must be >= 1");
  HittingDistribution dist;
  dist.cdf.resize(T + 1);
  dist.stderr_.assign(T + 1, 0.0);
  for (std::size_t t = 0; t <= T; ++t) dist.cdf[t] = hit_condition_probability(n, sampler, HitCondition::hit_by(t));
  dist.never = 1.0 - dist.cdf[T];
  return dist;
}

HittingDistribution hitting_time_distribution_mc(std::size_t n, SamplerKind sampler, std::size_t T, std::size_t M,
                                                 std::uint64_t base_seed) {
  if (n == 0) throw std::invalid_argument("hitting_time_distribution: n must be >= 1");
  if (M == 0) throw std::invalid_argument("hitting_time_distribution: M must be >= 1");
  std::vector<std::size_t> counts(T + 2, 0);  // counts[t] = #{H = t}, counts[T+1] = never
  for (std::size_t k = 0; k < M; ++k) {
    IndexSampler draw(n, sampler, derive_seed(base_seed, k));
    std::size_t h = T + 1;
    for (std::size_t t = 1; t <= T; ++t) {
      if (draw.next() == 0) {
        h = t;
        break;
      }
    }
    ++counts[h];
  }
  HittingDistribution dist;
  dist.trials = M;
  dist.cdf.resize(T + 1);
  dist.stderr_.resize(T + 1);
  const double m = static_cast<double>(M);
  std::size_t cum = 0;
  for (std::size_t t = 0; t <= T; ++t) {
    cum += counts[t];
    const double p = static_cast<double>(cum) / m;
    dist.cdf[t] = p;
    dist.stderr_[t] = std::sqrt(p * (1.0 - p) / m);
  }
  dist.never = static_cast<double>(counts[T + 1]) / m;
  return dist;
}

// ---------------------------------------------------------------------------

ExactDivergence enumerate_exact_divergence(const Instance& instance, std::size_t T, double cap) {
  if (T == 0) throw std::invalid_argument("enumerate_exact_divergence: T must be >= 1");
  const std::size_t n = instance.twins.size();
  const double total = std::pow(static_cast<double>(n), static_cast<double>(T));
  if (total > cap) {
    throw std::invalid_argument("enumerate_exact_divergence: n^T = " + std::to_string(total) +
                                " exceeds the cap " + std::to_string(cap));
  }
  const auto& s = instance.twins.s();
  const auto& sp = instance.twins.s_prime();

  // Depth-first over the index tree; states[t] holds (w_t, w'_t) for the current prefix.
  std::vector<Vector> ws(T + 1, instance.w0);
  std::vector<Vector> wps(T + 1, instance.w0);
  std::vector<double> sums(T + 1, 0.0);
  Vector g, gp;
  std::size_t leaves = 0;

  std::function<void(std::size_t)> descend = [&](std::size_t t) {
    // t is the depth already computed; extend to t + 1.
    const double alpha = instance.schedule.at(t + 1);
    for (std::size_t idx = 0; idx < n; ++idx) {
      loss_gradient_into(instance.loss, ws[t], s[idx], g);
      loss_gradient_into(instance.loss, wps[t], sp[idx], gp);
      ws[t + 1] = ws[t] - alpha * g;
      wps[t + 1] = wps[t] - alpha * gp;
      sums[t + 1] += (ws[t + 1] - wps[t + 1]).norm();
      if (t + 1 == T) {
        ++leaves;
      } else {
        descend(t + 1);
      }
    }
  };
  descend(0);

  ExactDivergence out;
  out.sequences = leaves;
  out.profile.resize(T + 1);
  double paths = 1.0;
  for (std::size_t t = 0; t <= T; ++t) {
    out.profile[t] = sums[t] / paths;
    paths *= static_cast<double>(n);
  }
  out.mean = out.profile[T];
  return out;
}

}  // namespace stablab
