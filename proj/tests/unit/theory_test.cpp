#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stablab/theory.hpp"

using namespace stablab;

namespace {

BoundParams params(std::initializer_list<std::pair<const char*, double>> kv) {
  BoundParams p;
  for (const auto& [k, v] : kv) {
    const std::string key = k;
    if (key == "n") p.n = v;
    else if (key == "T") p.T = v;
    else if (key == "L") p.L = v;
    else if (key == "a") p.a = v;
    else if (key == "b") p.b = v;
    else if (key == "gamma") p.gamma = v;
    else if (key == "zeta") p.zeta = v;
    else if (key == "xi") p.xi = v;
    else if (key == "R") p.R = v;
    else if (key == "t0") p.t0 = v;
    else if (key == "gap") p.gap = v;
    else ADD_FAILURE() << "unknown key " << key;
  }
  return p;
}

double bound(BoundKind kind, const BoundParams& p) { return evaluate_bound(kind, p).value; }

}  // namespace

TEST(Recursion, TelescopingSumAtZeroCurvature) {
  const auto e = recursion_lemma1(0.0, StepSchedule::constant(0.05), 10, 1.0, 100);
  ASSERT_EQ(e.size(), 101u);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_NEAR(e[100], 0.5, 1e-12);
}

TEST(Recursion, TwoStepHandEvaluation) {
  const auto e = recursion_lemma1(1.0, StepSchedule::constant(0.5), 2, 2.0, 2);
  EXPECT_DOUBLE_EQ(e[1], 0.5);
  EXPECT_DOUBLE_EQ(e[2], 0.75);
}

TEST(Recursion, ContractionFixedPoint) {
  // alpha lambda = 1/4, alpha gap / n = 0.05: fixed point 0.2.
  const auto e = recursion_lemma1(0.5, StepSchedule::constant(0.5), 10, 1.0, 200);
  EXPECT_NEAR(e.back(), 0.2, 1e-12);
  EXPECT_NEAR(e[60], 0.2 * (1.0 - std::pow(0.75, 60)), 1e-15);
}

TEST(Recursion, ExpansiveForNegativeCurvature) {
  const auto e = recursion_lemma1(-1.0, StepSchedule::constant(0.1), 5, 1.0, 3);
  EXPECT_NEAR(e[3], 0.02 * (1 + 1.1 + 1.1 * 1.1), 1e-15);
}

TEST(Recursion, RejectsOverlargeStep) {
  EXPECT_THROW(recursion_lemma1(3.0, StepSchedule::constant(0.5), 2, 1.0, 3), std::invalid_argument);
}

TEST(Lemma2, HandSumProduct) {
  EXPECT_DOUBLE_EQ(lemma2_lower_bound(1.0, StepSchedule::constant(0.5), 2, 2.0, 3), 0.75);
  EXPECT_NEAR(lemma2_lower_bound(0.0, StepSchedule::harmonic(0.3), 4, 2.0, 6),
              0.5 * 0.3 * (1 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5), 1e-15);
}

TEST(Lemma2, AgreesWithRecursionOnRandomDraws) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double lambda = 2.0 * unit(rng);
    const double alpha = unit(rng) / std::max(lambda, 1.0);
    const std::size_t n = 2 + static_cast<std::size_t>(20 * unit(rng));
    const std::size_t T = 1 + static_cast<std::size_t>(200 * unit(rng));
    const double gap = 3.0 * unit(rng);
    const auto schedule = (k % 2 == 0) ? StepSchedule::constant(alpha) : StepSchedule::harmonic(alpha);
    const auto rec = recursion_lemma1(lambda, schedule, n, gap, T);
    EXPECT_NEAR(lemma2_lower_bound(lambda, schedule, n, gap, T), rec[T - 1], 1e-12);
  }
}

TEST(Bounds, Examples) {
  EXPECT_DOUBLE_EQ(bound(BoundKind::StronglyConvexLower, params({{"gamma", 1}, {"n", 10}})), 0.00625);
  EXPECT_DOUBLE_EQ(bound(BoundKind::StronglyConvexLower, params({{"gamma", 0.5}, {"n", 10}})), 0.0125);
  const double nl = bound(BoundKind::NonconvexLower, params({{"a", 0.05}, {"n", 10}, {"T", 1000}}));
  EXPECT_DOUBLE_EQ(nl, std::pow(1000.0, 0.05) / (6.0 * std::pow(10.0, 1.05)));
  EXPECT_NEAR(nl, 0.020982, 5e-7);
  EXPECT_NEAR(bound(BoundKind::PermutationUpper, params({{"L", 1}, {"a", 0.05}, {"n", 10}, {"T", 1000}})), 0.2518,
              5e-5);
  EXPECT_NEAR(bound(BoundKind::BurnInProbability, params({{"n", 10}})), 0.6513, 5e-5);
  EXPECT_NEAR(bound(BoundKind::ExponentialLower, params({{"a", 0.05}, {"n", 5}, {"T", 200}})), 5.9365, 5e-5);
  EXPECT_NEAR(bound(BoundKind::NonconvexConditionalLower, params({{"a", 0.05}, {"n", 10}, {"T", 1000}, {"t0", 10}})),
              0.0629, 5e-5);
  EXPECT_NEAR(bound(BoundKind::UniformUpper, params({{"L", 1}, {"a", 0.05}, {"n", 10}, {"T", 1000}})),
              8.0 * std::log(10.0) * 0.2518, 1e-3);
}

TEST(Bounds, ScheduleDependentKinds) {
  auto p = params({{"L", 2}, {"n", 10}, {"T", 100}});
  p.schedule = StepSchedule::constant(0.05);
  EXPECT_NEAR(bound(BoundKind::ConvexLower, p), 0.5, 1e-12);
  EXPECT_NEAR(bound(BoundKind::ConvexUpperPrior, p), 1.0, 1e-12);
}

TEST(Bounds, DivergenceAndFactoredForms) {
  const auto perm = evaluate_bound(BoundKind::PermutationUpper, params({{"L", 2}, {"a", 0.05}, {"n", 10}, {"T", 100}}));
  ASSERT_TRUE(perm.divergence_value);
  EXPECT_NEAR(*perm.divergence_value * 2.0, perm.value, 1e-15);
  const auto dc = evaluate_bound(BoundKind::DatadepConvexUpper,
                                 params({{"L", 1}, {"R", 2}, {"xi", 0.2}, {"gamma", 1}, {"n", 20}}));
  EXPECT_DOUBLE_EQ(dc.value, 16.0 * 4.0 / (0.2 * 20.0));
  EXPECT_DOUBLE_EQ(*dc.divergence_value, 8.0 / (0.2 * 20.0));
  const auto nl = evaluate_bound(BoundKind::NonconvexLower, params({{"a", 0.05}, {"n", 10}, {"T", 1000}, {"gap", 2}}));
  EXPECT_DOUBLE_EQ(*nl.factored_value, 2.0 * nl.value);
  EXPECT_EQ(nl.side, BoundSide::Lower);
  EXPECT_EQ(evaluate_bound(BoundKind::BurnInProbability, params({{"n", 3}})).side, BoundSide::Lower);
}

TEST(Bounds, MissingParameterNamed) {
  try {
    evaluate_bound(BoundKind::PermutationUpper, params({{"a", 0.05}, {"n", 10}, {"T", 1000}}));
    FAIL() << "expected error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'L'"), std::string::npos) << e.what();
  }
  for (auto kind : all_bound_kinds()) EXPECT_THROW(evaluate_bound(kind, BoundParams{}), std::invalid_argument);
  EXPECT_THROW(evaluate_bound(BoundKind::ConvexLower, params({{"L", 1}, {"n", 10}, {"T", 5}})), std::invalid_argument);
}

TEST(Bounds, NamesRoundTrip) {
  for (auto kind : all_bound_kinds()) EXPECT_EQ(parse_bound_kind(to_string(kind)), kind);
  EXPECT_EQ(all_bound_kinds().size(), 13u);
  EXPECT_THROW(parse_bound_kind("nope"), std::invalid_argument);
}

TEST(Bounds, MonotoneInTAndN) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto kind : {BoundKind::NonconvexLower, BoundKind::PermutationUpper}) {
    for (int k = 0; k < 200; ++k) {
      const double a = 0.1 * unit(rng) + 1e-3;
      const double n = 2 + 1000 * unit(rng);
      const double T = 1 + 1e5 * unit(rng);
      const double base = bound(kind, params({{"L", 1}, {"a", a}, {"n", n}, {"T", T}}));
      EXPECT_GE(bound(kind, params({{"L", 1}, {"a", a}, {"n", n}, {"T", T * 1.5}})), base);
      EXPECT_LE(bound(kind, params({{"L", 1}, {"a", a}, {"n", n * 1.5}, {"T", T}})), base);
    }
  }
}

TEST(Bounds, PermutationBeatsPriorWhenHorizonShort) {
  int compared = 0;
  for (double a : {0.01, 0.05, 0.1, 0.5, 1.0}) {
    for (double n : {10.0, 100.0, 1000.0}) {
      for (double T : {10.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
        // Strict inequality with room for rounding at the boundary T^(a/(1+a)) = n.
        if (!(std::pow(T, a / (1 + a)) < n * (1 - 1e-9))) continue;
        const auto p = params({{"L", 0.7}, {"a", a}, {"n", n}, {"T", T}});
        EXPECT_LT(bound(BoundKind::PermutationUpper, p) / bound(BoundKind::PriorNonconvexUpper, p), 1.0);
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 60);
}

TEST(Zeta, Examples) {
  ZetaParams big{2.0, 1.0, 0.1, 0.5, 1e9, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(zeta_estimate(big).value, 2.0);
  ZetaParams quad{2.0, 0.0, 0.1, 0.5, 1.5, 3.0, 0.5};
  EXPECT_DOUBLE_EQ(zeta_estimate(quad).value, 0.5 * 1.5);
  ZetaParams noisy{2.0, 1.0, 0.25, 0.0, 0.1, -0.01, 1.0};
  const auto r = zeta_estimate(noisy);
  EXPECT_TRUE(r.clamped);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_DOUBLE_EQ(r.value, 0.1);
  ZetaParams full{10.0, 2.0, 0.25, 0.4, 0.1, 4.0, 1.0};
  EXPECT_DOUBLE_EQ(zeta_estimate(full).value, 0.1 + 2.0 * (0.1 + 1.0));
}

TEST(Growth, Examples) {
  const auto zero = growth_recursion_check(0.05, 0.0, 10, 1000);
  EXPECT_EQ(zero.x_T, 0.0);
  EXPECT_TRUE(zero.holds);
  const auto g = growth_recursion_check(0.05, 1.0, 10, 1000);
  EXPECT_TRUE(g.holds);
  EXPECT_NEAR(g.lower_bound, std::pow(100.0, 0.05), 1e-15);
  const auto small = growth_recursion_check(0.05, 0.003, 1, 10000);
  EXPECT_TRUE(small.holds);
  EXPECT_GT(small.x_T / small.lower_bound, 1.0);
}

TEST(Growth, HoldsOnGridWithHorizonAtLeastThreeBurnIns) {
  int points = 0;
  for (double a : {0.01, 0.03, 0.05, 0.08, 0.1}) {
    for (std::size_t t0 : {1, 5, 10, 50}) {
      for (std::size_t ratio : {3, 10, 30, 100, 1000}) {
        const auto g = growth_recursion_check(a, 1.0, t0, t0 * ratio);
        EXPECT_TRUE(g.holds) << "a=" << a << " t0=" << t0 << " T=" << t0 * ratio;
        ++points;
      }
    }
  }
  EXPECT_EQ(points, 100);
}

TEST(Growth, FailsForShortHorizons) {
  // x_T grows like y log(T/t0), which stays below y (T/t0)^a until T/t0 is near e.
  EXPECT_FALSE(growth_recursion_check(0.05, 1.0, 10, 20).holds);
  EXPECT_FALSE(growth_recursion_check(0.1, 1.0, 100, 110).holds);
}

TEST(Hitting, Examples) {
  const auto h = hitting_probability_bounds(10, 10, 20);
  EXPECT_DOUBLE_EQ(h.zero_bound, 0.5);
  const double q = 0.9;
  EXPECT_NEAR(h.exact_zero_given_hit, std::pow(q, 10) * (1 - std::pow(q, 10)) / (1 - std::pow(q, 20)), 1e-15);
  EXPECT_LE(h.exact_zero_given_hit, 0.5);
  const auto c4 = hitting_probability_bounds(10, 5, 20);
  EXPECT_DOUBLE_EQ(c4.hit_bound, 0.75);
  EXPECT_LE(c4.exact_hit_given_hit, 0.75);
  EXPECT_TRUE(c4.holds);
  EXPECT_THROW(hitting_probability_bounds(10, 0, 5), std::invalid_argument);
}

TEST(Hitting, BoundsHoldOnGrid) {
  for (std::size_t n : {2, 3, 5, 10, 20, 50, 100}) {
    for (std::size_t t_prev = 1; t_prev <= n; t_prev += std::max<std::size_t>(1, n / 7)) {
      for (std::size_t c : {2, 4, 8}) {
        const auto h = hitting_probability_bounds(n, t_prev, c * t_prev);
        EXPECT_TRUE(h.holds) << n << " " << t_prev << " " << c;
        EXPECT_LE(h.exact_zero_given_hit, h.zero_bound);
        EXPECT_LE(h.exact_hit_given_hit, h.hit_bound);
        EXPECT_NEAR(h.exact_zero_given_hit + h.exact_hit_given_hit, 1.0, 1e-12);
      }
    }
  }
}
