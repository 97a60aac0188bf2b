#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "decisive/error.hpp"
#include "decisive/metrics.hpp"

using namespace decisive;

namespace {

PredictionRecord binary(double p_correct) { return {{p_correct, 1.0 - p_correct}, 0}; }

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double zero_share = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng) < zero_share ? 0.0 : u(rng);
  return v;
}

}  // namespace

TEST(GeneralizedOrder, RejectsNonFinite) {
  EXPECT_THROW(GeneralizedOrder{std::nan("")}, UsageError);
  EXPECT_THROW(GeneralizedOrder{INFINITY}, UsageError);
  EXPECT_DOUBLE_EQ(ROBUSTNESS.rho(), -2.0 / 3.0);
}

TEST(FloorGamma, RaisesOnlySmallValues) {
  const std::vector<double> in{0.0, 0.003, 0.005, 0.5};
  EXPECT_EQ(floor_gamma(in, 0.005), (std::vector<double>{0.005, 0.005, 0.005, 0.5}));
  EXPECT_EQ(floor_gamma(in, 0.0), in);
}

TEST(FloorGamma, RejectsOutOfDomain) {
  const std::vector<double> ok{0.5};
  EXPECT_THROW(floor_gamma(ok, 1.0), UsageError);
  EXPECT_THROW(floor_gamma(ok, -0.1), UsageError);
  const std::vector<double> bad{0.5, 1.5};
  try {
    floor_gamma(bad, 0.005);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(GeneralizedMean, Examples) {
  EXPECT_DOUBLE_EQ(generalized_mean(std::vector<double>{0.2, 0.4}, GeneralizedOrder{1.0}), 0.3);
  EXPECT_DOUBLE_EQ(generalized_mean(std::vector<double>{0.25, 1.0}, GeneralizedOrder{0.0}), 0.5);
  // mpmath, 40 digits
  EXPECT_NEAR(generalized_mean(std::vector<double>{0.9, 0.5, 0.1}, ROBUSTNESS),
              0.263354606641461155694, 1e-15);
  for (double rho : {-2.0 / 3.0, 0.0, 1.0, 3.0}) {
    EXPECT_EQ(generalized_mean(std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1.0, 7.0, 0.5},
                               GeneralizedOrder{rho}),
              0.5);
  }
}

TEST(GeneralizedMean, Errors) {
  const std::vector<double> empty;
  const std::vector<double> two{0.1, 0.2};
  EXPECT_THROW(generalized_mean(empty, GeneralizedOrder{1.0}), UsageError);
  EXPECT_THROW(generalized_mean(two, std::vector<double>{1.0}, GeneralizedOrder{1.0}), UsageError);
  EXPECT_THROW(generalized_mean(two, std::vector<double>{0.0, 0.0}, GeneralizedOrder{1.0}), UsageError);
  EXPECT_THROW(generalized_mean(two, std::vector<double>{1.0, -1.0}, GeneralizedOrder{1.0}), DomainError);
}

TEST(GeneralizedMean, ZeroValueLimit) {
  const std::vector<double> v{0.0, 0.5, 1.0};
  EXPECT_EQ(generalized_mean(v, ROBUSTNESS), 0.0);
  EXPECT_EQ(generalized_mean(v, GEOMETRIC), 0.0);
  EXPECT_DOUBLE_EQ(generalized_mean(v, DECISIVENESS), 0.5);
}

TEST(GeneralizedMean, WeightsActAsMultiplicity) {
  const std::vector<double> v{0.5, 1.0};
  const std::vector<double> w{1.0, 3.0};
  const std::vector<double> expanded{0.5, 1.0, 1.0, 1.0};
  for (double rho : {-2.0 / 3.0, 0.0, 1.0}) {
    EXPECT_NEAR(generalized_mean(v, w, GeneralizedOrder{rho}), generalized_mean(expanded, GeneralizedOrder{rho}),
                1e-15);
  }
  EXPECT_DOUBLE_EQ(generalized_mean(v, w, GeneralizedOrder{1.0}), 0.875);
}

TEST(GeneralizedMean, OrderingProperty) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v = floor_gamma(random_values(rng, 1 + trial % 50, 0.05), 0.005);
    const auto m = generalized_means(v, {});
    EXPECT_LE(m.robustness, m.geometric + 1e-12);
    EXPECT_LE(m.geometric, m.decisiveness + 1e-12);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    EXPECT_GE(m.robustness, *lo);
    EXPECT_LE(m.decisiveness, *hi);
    if (*lo != *hi) EXPECT_LT(m.robustness, m.decisiveness);
  }
}

TEST(GeneralizedMean, PermutationInvariant) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_values(rng, 30);
    auto w = random_values(rng, 30);
    w[0] += 0.1;
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> pv, pw;
    for (auto i : idx) {
      pv.push_back(v[i]);
      pw.push_back(w[i]);
    }
    for (double rho : {-2.0 / 3.0, 0.0, 1.0}) {
      EXPECT_NEAR(generalized_mean(v, w, GeneralizedOrder{rho}), generalized_mean(pv, pw, GeneralizedOrder{rho}),
                  1e-12);
    }
  }
}

TEST(PredictionAccuracy, Examples) {
  EXPECT_EQ(prediction_accuracy(std::vector<PredictionRecord>{{{0.9, 0.1}, 0}}), 1.0);
  EXPECT_EQ(prediction_accuracy(std::vector<PredictionRecord>{{{0.9, 0.1}, 0}, {{0.9, 0.1}, 1}}), 0.5);
  EXPECT_EQ(prediction_accuracy(std::vector<PredictionRecord>{{{0.5, 0.5}, 0}}), 1.0);
  EXPECT_EQ(prediction_accuracy(std::vector<PredictionRecord>{{{0.5, 0.5}, 1}}), 0.0);
  EXPECT_THROW(prediction_accuracy(std::vector<PredictionRecord>{}), UsageError);
}

TEST(CrossEntropy, Examples) {
  EXPECT_EQ(cross_entropy(std::vector<PredictionRecord>{binary(1.0)}, 0.005), 0.0);
  EXPECT_FALSE(std::signbit(cross_entropy(std::vector<PredictionRecord>{binary(1.0)}, 0.005)));
  EXPECT_NEAR(cross_entropy(std::vector<PredictionRecord>{binary(1.0), binary(std::exp(-1.0))}, 0.005), 0.5,
              1e-15);
  EXPECT_EQ(cross_entropy(std::vector<PredictionRecord>{binary(0.0), binary(0.5)}, 0.0), INFINITY);
  EXPECT_NEAR(cross_entropy(std::vector<PredictionRecord>{binary(0.0)}, 0.005), -std::log(0.005), 1e-15);
}

TEST(ReportedMetrics, Examples) {
  const EvalConfig config;
  const auto ones = reported_metrics(std::vector<PredictionRecord>{binary(1.0), binary(1.0)}, config);
  EXPECT_EQ(ones.robustness, 1.0);
  EXPECT_EQ(ones.geometric, 1.0);
  EXPECT_EQ(ones.decisiveness, 1.0);

  const auto mixed = reported_metrics(std::vector<PredictionRecord>{binary(1.0), binary(0.0)}, config);
  EXPECT_DOUBLE_EQ(mixed.decisiveness, 0.5025);
  EXPECT_NEAR(mixed.geometric, 0.0707106781186547524, 1e-16);
}

TEST(ReportedMetrics, CorrectDecisionsOnly) {
  EvalConfig config;
  const std::vector<PredictionRecord> recs{{{0.8, 0.2}, 0}, {{0.7, 0.3}, 1}};
  EXPECT_DOUBLE_EQ(reported_metrics(recs, config).decisiveness, 0.55);
  config.correct_decisions_only = true;
  EXPECT_DOUBLE_EQ(reported_metrics(recs, config).decisiveness, 0.8);
  const std::vector<PredictionRecord> none{{{0.7, 0.3}, 1}};
  EXPECT_THROW(reported_metrics(none, config), UsageError);
}

TEST(ReportedMetrics, ZeroGammaZeroValue) {
  EvalConfig config;
  config.gamma = 0.0;
  const auto m = reported_metrics(std::vector<PredictionRecord>{binary(0.0), binary(0.9)}, config);
  EXPECT_EQ(m.robustness, 0.0);
  EXPECT_EQ(m.geometric, 0.0);
  EXPECT_DOUBLE_EQ(m.decisiveness, 0.45);
}

TEST(ReportedMetrics, Properties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PredictionRecord> recs;
    const std::size_t n = 1 + trial % 40;
    for (std::size_t i = 0; i < n; ++i) recs.push_back(binary(u(rng) < 0.1 ? 0.0 : u(rng)));

    EvalConfig lo_cfg, hi_cfg;
    lo_cfg.gamma = 0.001;
    hi_cfg.gamma = 0.05;
    const auto lo = reported_metrics(recs, lo_cfg);
    const auto hi = reported_metrics(recs, hi_cfg);
    EXPECT_LE(lo.robustness, hi.robustness + 1e-12);
    EXPECT_LE(lo.geometric, hi.geometric + 1e-12);
    EXPECT_LE(lo.decisiveness, hi.decisiveness + 1e-12);
    for (double m : {hi.robustness, hi.geometric, hi.decisiveness}) {
      EXPECT_GE(m, hi_cfg.gamma);
      EXPECT_LE(m, 1.0);
    }

    auto tripled = recs;
    for (int k = 0; k < 2; ++k) tripled.insert(tripled.end(), recs.begin(), recs.end());
    const auto t = reported_metrics(tripled, hi_cfg);
    EXPECT_NEAR(t.robustness, hi.robustness, 1e-12);
    EXPECT_NEAR(t.geometric, hi.geometric, 1e-12);
    EXPECT_NEAR(t.decisiveness, hi.decisiveness, 1e-12);

    EXPECT_NEAR(std::exp(-cross_entropy(recs, hi_cfg.gamma)), hi.geometric, 1e-12);
  }
}

TEST(CompensatedSum, RecoversSmallTerms) {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}
