#include <gtest/gtest.h>

#include <cmath>

#include "decisive/binning.hpp"
#include "decisive/error.hpp"
#include "oracle/cases.hpp"
#include "oracle/naive_oracle.hpp"

using namespace decisive;

namespace {

EvalConfig config_for(const oracle::Case& c) {
  EvalConfig cfg;
  cfg.bins = c.bins;
  cfg.gamma = c.gamma;
  return cfg;
}

}  // namespace

TEST(Oracle, Hand10) {
  std::vector<PredictionRecord> recs;
  for (double p : {0.1, 0.2, 0.3, 0.8, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}) recs.push_back({{p, 1.0 - p}, 0});
  const auto o = oracle::evaluate(recs, 0.005, 2);
  ASSERT_EQ(o.bins.size(), 2u);
  EXPECT_EQ(o.bins[0].nc, 4u);
  EXPECT_EQ(o.bins[0].ni, 4u);
  EXPECT_EQ(o.bins[1].nc, 6u);
  EXPECT_EQ(o.out_of_range, 6u);
  EXPECT_NEAR(o.decisiveness, 0.8, 1e-15);
}

TEST(Oracle, PipelineMatchesOnSmallCases) {
  const auto cases = oracle::small_cases();
  ASSERT_GE(cases.size(), 200u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    SCOPED_TRACE(i);
    const auto& c = cases[i];
    const auto cfg = config_for(c);
    std::vector<double> correct;
    for (const auto& r : c.records) correct.push_back(r.correct_prob());

    const auto o = oracle::evaluate(c.records, c.gamma, c.bins);
    const auto t = fill_counts(build_bins(correct, cfg), c.records);
    ASSERT_EQ(t.bins.size(), o.bins.size());
    for (std::size_t j = 0; j < t.bins.size(); ++j) {
      EXPECT_EQ(t.bins[j].lo, o.bins[j].lo);
      EXPECT_EQ(t.bins[j].hi, o.bins[j].hi);
      EXPECT_EQ(t.bins[j].is_singularity, o.bins[j].singular);
      EXPECT_EQ(t.bins[j].n_correct, o.bins[j].nc);
      EXPECT_EQ(t.bins[j].n_incorrect, o.bins[j].ni);
    }
    EXPECT_EQ(t.out_of_range_incorrect, o.out_of_range);

    const auto m = truth_metrics(t, cfg);
    EXPECT_EQ(m.robustness, o.robustness) << "case " << i;
    EXPECT_EQ(m.geometric, o.geometric) << "case " << i;
    EXPECT_EQ(m.decisiveness, o.decisiveness) << "case " << i;
  }
}
