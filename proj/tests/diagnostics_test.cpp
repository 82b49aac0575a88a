#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rvlevy/diagnostics.hpp"

using namespace rvlevy;

TEST(TailEstimate, CountsAndStandardError) {
  const auto e = TailEstimate::from_counts(3.0, 1000, 37);
  EXPECT_EQ(e.p_hat, 37.0 / 1000.0);
  EXPECT_EQ(e.std_error, std::sqrt(e.p_hat * (1.0 - e.p_hat) / 1000.0));
  const auto empty = TailEstimate::from_counts(3.0, 0, 0);
  EXPECT_FALSE(empty.defined());
  EXPECT_TRUE(std::isnan(empty.p_hat));
  EXPECT_THROW(TailEstimate::from_counts(1.0, 3, 4), std::domain_error);
}

TEST(TailProb, DegenerateSamplers) {
  const auto zero = tail_prob(constant_sampler(0.0), 5.0, 1000, 1);
  EXPECT_EQ(zero.p_hat, 0.0);
  const auto always = tail_prob(constant_sampler(10.0), 5.0, 1000, 1);
  EXPECT_EQ(always.p_hat, 1.0);
  EXPECT_EQ(always.std_error, 0.0);
}

TEST(TailProb, ParetoExceedance) {
  const auto e = tail_prob(pareto_sampler(1.5), 4.0, 1000000, 11);
  EXPECT_NEAR(e.p_hat, 0.125, 3.0 * e.std_error);
  EXPECT_EQ(static_cast<double>(e.hits) / e.n, e.p_hat);
  const std::vector<double> levels{2.0, 4.0, 8.0};
  const auto many = tail_probs(pareto_sampler(1.5), levels, 100000, 11);
  ASSERT_EQ(many.size(), 3u);
  EXPECT_GE(many[0].hits, many[1].hits);
  EXPECT_GE(many[1].hits, many[2].hits);
}

TEST(Hill, ConstantLogRatiosGiveAlphaExactly) {
  // Order statistics with log X_(i) - log X_(k+1) = 1/alpha for the top k.
  const double alpha = 2.5;
  std::vector<double> sample{1.0, 1.0, 1.0, 1.0};
  for (int i = 0; i < 5; ++i) sample.push_back(std::exp(1.0 / alpha));
  const auto h = hill(sample, 5);
  EXPECT_NEAR(h.alpha_hat, alpha, 1e-12);
  EXPECT_NEAR(h.std_error, alpha / std::sqrt(5.0), 1e-12);
}

TEST(Hill, DeterministicQuantiles) {
  const std::size_t n = 100000;
  std::vector<double> sample(n);
  for (std::size_t i = 1; i <= n; ++i)
    sample[i - 1] = std::pow(static_cast<double>(n) / static_cast<double>(i), 0.5);
  const auto h = hill(sample, 1000);
  EXPECT_NEAR(h.alpha_hat, 2.0, 0.02);
}

TEST(Hill, ParetoSample) {
  Rng rng = make_stream(3, 0, StreamTag::auxiliary);
  std::vector<double> sample(100000);
  for (double& v : sample) v = pareto(rng, 1.5);
  const auto h = hill(sample, 1000);
  EXPECT_NEAR(h.alpha_hat, 1.5, 3.0 * h.std_error);
}

TEST(Hill, Validation) {
  const std::vector<double> bad{1.0, -2.0, 3.0};
  EXPECT_THROW(hill(bad, 1), std::domain_error);
  const std::vector<double> ok{1.0, 2.0, 3.0};
  EXPECT_THROW(hill(ok, 0), std::domain_error);
  EXPECT_THROW(hill(ok, 3), std::domain_error);
}

TEST(Ratio, DeltaMethodOfIndependentCounts) {
  // With A = B the ratio is exactly 1 with zero variance.
  const auto same = ratio_from_counts(1.0, 1000, 50, 50, 50);
  EXPECT_EQ(same.ratio, 1.0);
  EXPECT_NEAR(same.std_error, 0.0, 1e-15);
  const auto none = ratio_from_counts(1.0, 1000, 5, 0, 0);
  EXPECT_FALSE(none.defined());
}

TEST(Breiman, UnitMultiplierIsExact) {
  const std::vector<double> levels{2.0, 5.0, 10.0};
  for (const auto& r : breiman_ratio(pareto_sampler(2.0), constant_sampler(1.0), levels, 50000, 1)) {
    EXPECT_EQ(r.ratio, 1.0);
  }
}

TEST(Breiman, ConstantMultiplierGivesPowerRatio) {
  const std::vector<double> levels{2.0, 5.0, 10.0};
  for (const auto& r : breiman_ratio(pareto_sampler(2.0), constant_sampler(2.0), levels, 400000, 2))
    EXPECT_NEAR(r.ratio, 4.0, 3.0 * r.std_error);
}

TEST(TailEquivalence, MonotonePathsGiveRatioOne) {
  // Positive jumps, positive drift, no Gaussian part, positive integrand.
  const auto model = LevyModel::univariate(2.0, 1.5, 0.0, 0.5);
  const std::vector<double> levels{1.0, 3.0, 10.0};
  const auto out = tail_equivalence(model, ExpOuIntegrand{1.0, 0.3, {1.0}, {}}, levels,
                                    4000, 5, {1.0, 64, {}});
  for (const auto& r : out) {
    ASSERT_TRUE(r.defined());
    EXPECT_EQ(r.ratio, 1.0);
  }
}

TEST(TailEquivalence, RatioNeverBelowOne) {
  const auto model = LevyModel::univariate(2.0, 1.5, 1.0, -0.5, 0.6);
  const std::vector<double> levels{0.5, 1.0, 2.0, 4.0};
  for (double t : {0.5, 1.0}) {
    const auto out = tail_equivalence(model, ConstantIntegrand{{1.0}}, levels, 4000, 6,
                                      {t, 64, {}});
    for (const auto& r : out) {
      if (r.defined()) {
        EXPECT_GE(r.ratio, 1.0);
      }
    }
  }
}

TEST(AnalyticPrediction, MatchesClosedForms) {
  const auto m = RegVarMeasure::univariate(1.5, 1.0);
  const double u = 10.0;
  EXPECT_NEAR(analytic_prediction(m, ConstantIntegrand{{1.0}}, 1.0, u, 10, 1).mean,
              std::pow(u, -1.5), 1e-15);
  EXPECT_NEAR(analytic_prediction(m, ConstantIntegrand{{1.0}}, 0.5, u, 10, 1).mean,
              0.5 * std::pow(u, -1.5), 1e-15);
  EXPECT_NEAR(analytic_prediction(m, DeterministicIntegrand::exponential({1.0}, 1.0), 1.0,
                                  u, 4, 1)
                  .mean,
              0.016377, 5e-6);
  EXPECT_THROW(analytic_prediction(RegVarMeasure(1.5, 1.0, {{{1.0, 0.0}, 1.0}}),
                                   ConstantIntegrand{{1.0, 1.0}}, 1.0, u, 4, 1),
               std::domain_error);
}

TEST(OneBigJump, SingleJumpWithoutDiffusionIsExact) {
  // No Gaussian part, no drift, one jump at most with high probability:
  // replicates with exactly one jump give W = W1, so any hit needs two jumps.
  auto model = LevyModel::univariate(0.05, 1.5, 0.0, 0.0);
  const std::vector<double> levels{1.0, 2.0, 4.0};
  const auto curves = one_big_jump_curve(model, ConstantIntegrand{{1.0}},
                                         CurveTarget::levy_path, levels, 20000, 3,
                                         {0.1, 32, 3});
  for (const auto& e : curves.by_jump.conditional_probs) {
    ASSERT_TRUE(e.defined());
    EXPECT_LT(e.p_hat, 0.1);
  }
}

TEST(OneBigJump, UndefinedLevelsAreFlagged) {
  const auto model = LevyModel::univariate(1.0, 1.5, 0.1, 0.0);
  const std::vector<double> levels{2.0, 1e12};
  const auto curves = one_big_jump_curve(model, ExpOuIntegrand{1.0, 0.2, {1.0}, {}},
                                         CurveTarget::integral, levels, 2000, 4,
                                         {0.1, 32, 3});
  EXPECT_TRUE(curves.by_sup.conditional_probs[0].defined());
  EXPECT_FALSE(curves.by_sup.conditional_probs[1].defined());
  EXPECT_FALSE(curves.by_jump.conditional_probs[1].defined());
  const auto j = to_json_value(curves.by_sup);
  EXPECT_TRUE(j["points"][1]["p_hat"].is_null());
}

TEST(OneBigJump, CurvesDecreaseInLevel) {
  const auto model = LevyModel::univariate(1.0, 1.5, 0.5, 0.0);
  const std::vector<double> levels{2.0, 5.0, 10.0, 20.0};
  for (auto target : {CurveTarget::levy_path, CurveTarget::integral, CurveTarget::product}) {
    const auto curves = one_big_jump_curve(model, ExpOuIntegrand{1.0, 0.3, {1.0}, {}},
                                           target, levels, 40000, 8, {0.1, 64, 3});
    for (const auto* c : {&curves.by_sup, &curves.by_jump}) {
      const auto slope = trend_slope(*c);
      ASSERT_TRUE(slope.has_value());
      EXPECT_LE(*slope, 0.0) << to_string(target) << " " << to_string(c->conditioning);
      EXPECT_EQ(c->conjectural(), target == CurveTarget::product);
    }
  }
}

TEST(OneBigJump, SharedPoolIsThreadInvariant) {
  const auto model = LevyModel::univariate(1.0, 1.5, 0.5, 0.0);
  const std::vector<double> levels{2.0, 5.0};
  auto run = [&](unsigned threads) {
    set_thread_count(threads);
    return one_big_jump_curve(model, ConstantIntegrand{{1.0}}, CurveTarget::integral,
                              levels, 5000, 9, {0.1, 32, 3});
  };
  const auto a = run(1);
  const auto b = run(3);
  set_thread_count(0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    EXPECT_EQ(a.by_sup.conditional_probs[i].hits, b.by_sup.conditional_probs[i].hits);
    EXPECT_EQ(a.by_sup.conditional_probs[i].n, b.by_sup.conditional_probs[i].n);
  }
}

TEST(TrendSlope, SkipsUndefinedPoints) {
  ConditionalDistanceCurve c;
  c.levels = {1.0, 2.0, 4.0};
  c.conditional_probs = {TailEstimate::from_counts(1.0, 100, 40),
                         TailEstimate::from_counts(2.0, 0, 0),
                         TailEstimate::from_counts(4.0, 100, 20)};
  const auto s = trend_slope(c);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, -0.2 / std::log(4.0), 1e-12);
  c.conditional_probs.pop_back();
  EXPECT_FALSE(trend_slope(c).has_value());
}

TEST(SumBound, SingleTermIsTrivial) {
  PredictableSum one{[](Rng&) { return std::size_t{1}; }, pareto_sampler(1.5),
                     [](std::span<const double>) { return 1.0; }};
  const auto r = predictable_sum_bound(one, 100000, 5.0, 1);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.lhs.p_hat, r.rhs.p_hat, 4.0 * std::hypot(r.lhs.std_error, r.rhs.std_error));
  PredictableSum zero{poisson_count(2.0), constant_sampler(0.0),
                      [](std::span<const double>) { return 1.0; }};
  const auto z = predictable_sum_bound(zero, 1000, 1.0, 1);
  EXPECT_EQ(z.lhs.hits, 0u);
  EXPECT_EQ(z.rhs.hits, 0u);
}

TEST(MultiJump, ClosedFormValues) {
  const auto m = RegVarMeasure::univariate(1.5, 1.0);
  const std::vector<std::uint64_t> ns{100, 1000, 10000, 100000};
  const auto pts = multi_jump_trend(m, 1.0, 0.75, ns, 20000, 1);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_NEAR(pts[2].p_n, 1e-3, 1e-15);
  EXPECT_NEAR(pts[2].closed_form, 0.005, 5e-6);
  for (std::size_t i = 1; i < pts.size(); ++i)
    EXPECT_LT(pts[i].closed_form, pts[i - 1].closed_form);
  const auto none = multi_jump_trend(m, 0.0, 0.75, ns, 100, 1);
  for (const auto& p : none) {
    EXPECT_EQ(p.closed_form, 0.0);
    EXPECT_EQ(p.estimate, 0.0);
  }
  EXPECT_THROW(multi_jump_trend(m, 1.0, 0.4, ns, 100, 1), std::domain_error);
}
