// Copyright 2026 The hstrat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hstrat/metrics.hpp"

#include <random>

#include "gtest/gtest.h"
#include "hstrat/errors.hpp"

namespace hstrat {
namespace {

SampleIds ids(std::size_t n) {
  SampleIds out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

SubgroupAssignment assignment_of(const std::vector<std::size_t>& groups, std::size_t k) {
  SubgroupAssignment a;
  a.sample_ids = ids(groups.size());
  a.hard_labels = groups;
  a.n_components = k;
  a.responsibilities = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < groups.size(); ++i) a.responsibilities(i, groups[i]) = 1.0;
  return a;
}

MetadataTable one_column(const std::string& name, const std::vector<std::optional<std::string>>& values) {
  MetadataTable m;
  m.sample_ids = ids(values.size());
  m.attribute_names = {name};
  m.columns = {values};
  return m;
}

SubgroupPerformance perf_of(std::initializer_list<double> values) {
  SubgroupPerformance p;
  std::size_t id = 0;
  for (const double v : values) p.subgroups.push_back({id++, 50, v, true});
  return p;
}

TEST(CorrectnessTest, ArgmaxWithLowestIndexTies) {
  LabelVector labels{ids(3), {0, 1, 1}};
  PredictionMatrix preds{ids(3), Matrix(3, 2)};
  preds.probs << 0.5, 0.5, 0.3, 0.7, 0.9, 0.1;
  EXPECT_EQ(correctness(labels, preds), (std::vector<int>{1, 1, 0}));
}

TEST(SubgroupPerformanceTest, ThreeOfFourCorrect) {
  const SubgroupPerformance p = division_performance({0, 0, 0, 0}, {1, 1, 0, 1}, {}, Metric::kAccuracy, 1);
  ASSERT_EQ(p.subgroups.size(), 1u);
  EXPECT_DOUBLE_EQ(p.subgroups[0].performance, 0.75);
  EXPECT_EQ(p.subgroups[0].size, 4u);
}

TEST(SubgroupPerformanceTest, LargeSliceWithFivePercentAccuracy) {
  // 721 negatives and 17 positives, 37 correct in total.
  std::vector<int> labels(738, 0), correct(738, 0);
  for (std::size_t i = 721; i < 738; ++i) labels[i] = 1;
  for (std::size_t i = 0; i < 37; ++i) correct[i * 19] = 1;
  const SubgroupPerformance p =
      division_performance(std::vector<std::size_t>(738, 3), correct, labels, Metric::kAccuracy, 20);
  EXPECT_NEAR(p.subgroups[0].performance, 37.0 / 738.0, 1e-15);
  EXPECT_EQ(p.subgroups[0].id, 3u);
  EXPECT_TRUE(p.subgroups[0].included_in_gap);
}

TEST(SubgroupPerformanceTest, SingleSubgroupIsOverallAccuracy) {
  LabelVector labels{ids(5), {0, 1, 1, 0, 1}};
  PredictionMatrix preds{ids(5), Matrix(5, 2)};
  preds.probs << 0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.3, 0.7, 0.1, 0.9;
  const SubgroupPerformance p =
      subgroup_performance(assignment_of({0, 0, 0, 0, 0}, 1), labels, preds, Metric::kAccuracy, 1);
  EXPECT_DOUBLE_EQ(p.subgroups[0].performance, 0.6);
  EXPECT_EQ(p.total_size(), 5u);
}

TEST(SubgroupPerformanceTest, BalancedAccuracyAveragesClasses) {
  // Class 0: 3 of 4 correct; class 1: 0 of 1 correct.
  const SubgroupPerformance p =
      division_performance({0, 0, 0, 0, 0}, {1, 1, 1, 0, 0}, {0, 0, 0, 0, 1}, Metric::kBalancedAccuracy, 1);
  EXPECT_DOUBLE_EQ(p.subgroups[0].performance, 0.375);
}

TEST(SubgroupPerformanceTest, SmallSubgroupsExcludedAndEmptyOnesDropped) {
  const SubgroupPerformance p = division_performance({0, 0, 0, 4}, {1, 0, 1, 1}, {}, Metric::kAccuracy, 2);
  ASSERT_EQ(p.subgroups.size(), 2u);
  EXPECT_EQ(p.subgroups[1].id, 4u);
  EXPECT_FALSE(p.subgroups[1].included_in_gap);
  EXPECT_TRUE(p.subgroups[0].included_in_gap);
  EXPECT_THROW(division_performance({}, {}, {}, Metric::kAccuracy, 1), EmptyDivisionError);
  EXPECT_THROW(division_performance({0}, {1, 1}, {}, Metric::kAccuracy, 1), AlignmentError);
}

TEST(PerformanceGapTest, HandExamples) {
  EXPECT_NEAR(performance_gap(perf_of({0.9, 0.6})), 0.3, 1e-12);
  EXPECT_EQ(performance_gap(perf_of({0.42})), 0.0);
  EXPECT_NEAR(performance_gap(perf_of({0.05, 0.90, 0.95})), 0.90, 1e-12);
}

TEST(PerformanceGapTest, IgnoresExcludedSubgroups) {
  SubgroupPerformance p = perf_of({0.9, 0.1, 0.6});
  p.subgroups[1].included_in_gap = false;
  EXPECT_NEAR(performance_gap(p), 0.3, 1e-12);
  for (auto& s : p.subgroups) s.included_in_gap = false;
  EXPECT_THROW(performance_gap(p), EmptyDivisionError);
}

TEST(PerformanceGapTest, InvariantUnderRelabelingAndZeroWhenMerged) {
  std::mt19937_64 rng(3);
  std::vector<std::size_t> groups(200);
  std::vector<int> correct(200);
  for (std::size_t i = 0; i < 200; ++i) {
    groups[i] = rng() % 5;
    correct[i] = static_cast<int>(rng() % 2);
  }
  const double gap = performance_gap(division_performance(groups, correct, {}, Metric::kAccuracy, 5));
  const std::vector<std::size_t> relabel = {7, 2, 9, 0, 4};
  std::vector<std::size_t> renamed(200);
  for (std::size_t i = 0; i < 200; ++i) renamed[i] = relabel[groups[i]];
  EXPECT_EQ(performance_gap(division_performance(renamed, correct, {}, Metric::kAccuracy, 5)), gap);
  EXPECT_EQ(performance_gap(division_performance(std::vector<std::size_t>(200, 1), correct, {},
                                                 Metric::kAccuracy, 5)),
            0.0);
}

TEST(AveragePurityTest, PureSubgroupsScoreOne) {
  const auto meta = one_column("sex", {"m", "m", "f", "f", "f"});
  const PurityBreakdown b = average_purity(assignment_of({0, 0, 1, 1, 1}, 2), meta, {"sex"}, 0.0);
  EXPECT_NEAR(b.average_purity, 1.0, 1e-12);
  EXPECT_EQ(b.correction, 0.0);
}

TEST(AveragePurityTest, MixedSubgroupsHandExample) {
  // s1 = {8 a, 2 b}, s2 = {3 a, 7 b}.
  std::vector<std::optional<std::string>> values;
  std::vector<std::size_t> groups;
  for (int i = 0; i < 8; ++i) values.emplace_back("a"), groups.push_back(0);
  for (int i = 0; i < 2; ++i) values.emplace_back("b"), groups.push_back(0);
  for (int i = 0; i < 3; ++i) values.emplace_back("a"), groups.push_back(1);
  for (int i = 0; i < 7; ++i) values.emplace_back("b"), groups.push_back(1);
  const PurityBreakdown b = average_purity(assignment_of(groups, 2), one_column("attr", values), {"attr"}, 0.0);
  EXPECT_NEAR(b.average_purity, 0.75, 1e-12);
  ASSERT_EQ(b.columns.size(), 1u);
  const ColumnPurity& col = b.columns[0];
  ASSERT_EQ(col.values.size(), 2u);
  EXPECT_EQ(col.values[0].value, "a");
  EXPECT_EQ(col.values[0].best_subgroup, std::optional<std::size_t>(0));
  EXPECT_NEAR(col.values[0].contribution, 0.8, 1e-12);
  EXPECT_NEAR(col.values[1].contribution, 0.7, 1e-12);
  EXPECT_EQ(col.subgroups[1].majority, std::optional<std::string>("b"));
}

TEST(AveragePurityTest, CorrectionHalvesTenSampleSubgroup) {
  const auto meta = one_column("attr", std::vector<std::optional<std::string>>(10, "a"));
  const PurityBreakdown b = average_purity(assignment_of(std::vector<std::size_t>(10, 0), 1), meta, {"attr"}, 10.0);
  EXPECT_NEAR(b.average_purity, 0.5, 1e-12);
}

TEST(AveragePurityTest, UnrepresentedValueContributesZero) {
  // Both subgroups are majority "a", so "b" has no subgroup.
  const auto meta = one_column("attr", {"a", "a", "b", "a", "a", "b"});
  const PurityBreakdown b = average_purity(assignment_of({0, 0, 0, 1, 1, 1}, 2), meta, {"attr"}, 0.0);
  EXPECT_NEAR(b.average_purity, (2.0 / 3.0 + 0.0) / 2.0, 1e-12);
  EXPECT_FALSE(b.columns[0].values[1].best_subgroup.has_value());
}

TEST(AveragePurityTest, MissingValuesLeaveDenominator) {
  const auto meta = one_column("attr", {"a", std::nullopt, std::nullopt, "b"});
  const PurityBreakdown b = average_purity(assignment_of({0, 0, 1, 1}, 2), meta, {"attr"}, 0.0);
  EXPECT_NEAR(b.average_purity, 1.0, 1e-12);
  EXPECT_EQ(b.columns[0].subgroups[0].counted, 1u);
}

TEST(AveragePurityTest, TiesPickSmallestValue) {
  const auto meta = one_column("attr", {"b", "a"});
  const PurityBreakdown b = average_purity(assignment_of({0, 0}, 1), meta, {"attr"}, 0.0);
  EXPECT_EQ(b.columns[0].subgroups[0].majority, std::optional<std::string>("a"));
}

TEST(AveragePurityTest, PairsAcrossColumnsAreAveragedTogether) {
  MetadataTable m;
  m.sample_ids = ids(4);
  m.attribute_names = {"x", "y"};
  m.columns = {{"0", "0", "1", "1"}, {"p", "q", "r", "s"}};
  // Column x: both values pure (1, 1). Column y: 4 values, two of them
  // majorities at 1/2 each, two unrepresented.
  const PurityBreakdown b = average_purity(assignment_of({0, 0, 1, 1}, 2), m, {"x", "y"}, 0.0);
  EXPECT_NEAR(b.average_purity, (1.0 + 1.0 + 0.5 + 0.5) / 6.0, 1e-12);
  EXPECT_NEAR(b.columns[0].average_purity, 1.0, 1e-12);
  EXPECT_NEAR(b.columns[1].average_purity, 0.25, 1e-12);
}

TEST(AveragePurityTest, NonIncreasingInCorrection) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30 + rng() % 200;
    std::vector<std::size_t> groups(n);
    std::vector<std::optional<std::string>> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      groups[i] = rng() % 6;
      const auto v = rng() % 5;
      if (v < 4) values[i] = std::string(1, static_cast<char>('a' + v));
    }
    const auto meta = one_column("attr", values);
    double previous = 2.0;
    for (const double c : {0.0, 1.0, 10.0, 100.0}) {
      const double ap = average_purity(assignment_of(groups, 6), meta, {"attr"}, c).average_purity;
      EXPECT_LE(ap, previous);
      EXPECT_GE(ap, 0.0);
      EXPECT_LE(ap, 1.0);
      previous = ap;
    }
  }
}

TEST(AveragePurityTest, Errors) {
  const auto meta = one_column("attr", {"a", "b"});
  const auto a = assignment_of({0, 1}, 2);
  EXPECT_THROW(average_purity(a, meta, {"nope"}, 0.0), UnknownAttributeError);
  EXPECT_THROW(average_purity(a, meta, {"attr"}, -1.0), RangeError);
}

TEST(MetadataBaselineTest, SingleColumnGap) {
  // 10 male (9 correct), 10 female (7 correct).
  std::vector<std::optional<std::string>> sex;
  std::vector<int> correct;
  for (int i = 0; i < 10; ++i) sex.emplace_back("male"), correct.push_back(i < 9 ? 1 : 0);
  for (int i = 0; i < 10; ++i) sex.emplace_back("female"), correct.push_back(i < 7 ? 1 : 0);
  const BaselineResult r = metadata_baseline(one_column("sex", sex), correct, 5);
  ASSERT_EQ(r.columns.size(), 1u);
  EXPECT_NEAR(*r.columns[0].gap, 0.2, 1e-12);
  EXPECT_NEAR(*r.per_sample.values[0], 0.9, 1e-12);
  EXPECT_NEAR(*r.per_sample.values[15], 0.7, 1e-12);
  EXPECT_EQ(r.columns[0].groups[0].value, "female");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(MetadataBaselineTest, PerSampleMeanAndMissingSkip) {
  // Column x: group "u" (samples 0-9) accuracy 0.9, "v" (10-19) 0.5.
  // Column y: group "p" (even samples) and "q" (odd samples).
  MetadataTable m;
  m.sample_ids = ids(20);
  m.attribute_names = {"x", "y"};
  m.columns.resize(2);
  std::vector<int> correct(20, 0);
  for (std::size_t i = 0; i < 20; ++i) {
    m.columns[0].emplace_back(i < 10 ? "u" : "v");
    m.columns[1].emplace_back(i % 2 == 0 ? "p" : "q");
  }
  for (const std::size_t i : {0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 18}) correct[i] = 1;
  m.columns[1][3] = std::nullopt;
  const BaselineResult r = metadata_baseline(m, correct, 1);
  const double p_acc = 1.0;        // every even sample is correct
  const double q_acc = 3.0 / 9.0;  // odd samples other than 3: 1, 5, 7 correct
  EXPECT_NEAR(*r.per_sample.values[0], (0.9 + p_acc) / 2.0, 1e-12);
  EXPECT_NEAR(*r.per_sample.values[11], (0.5 + q_acc) / 2.0, 1e-12);
  EXPECT_NEAR(*r.per_sample.values[3], 0.9, 1e-12);
}

TEST(MetadataBaselineTest, TwoColumnMeanIsArithmetic) {
  MetadataTable m;
  m.sample_ids = ids(20);
  m.attribute_names = {"x", "y"};
  m.columns.resize(2);
  std::vector<int> correct(20, 0);
  for (std::size_t i = 0; i < 20; ++i) {
    m.columns[0].emplace_back(i < 10 ? "g" : "h");
    m.columns[1].emplace_back(i < 5 || i >= 15 ? "k" : "l");
  }
  // x=g: 9/10. y=k (0-4, 15-19): 6/10.
  for (const std::size_t i : {0, 1, 2, 3, 4, 5, 6, 7, 8, 15}) correct[i] = 1;
  const BaselineResult r = metadata_baseline(m, correct, 1);
  EXPECT_NEAR(r.columns[0].groups[0].performance, 0.9, 1e-12);
  EXPECT_NEAR(r.columns[1].groups[0].performance, 0.6, 1e-12);
  EXPECT_NEAR(*r.per_sample.values[0], 0.75, 1e-12);
}

TEST(MetadataBaselineTest, ColumnWithoutLargeGroupIsSkipped) {
  MetadataTable m;
  m.sample_ids = ids(4);
  m.attribute_names = {"big", "tiny"};
  m.columns = {{"a", "a", "a", "a"}, {"p", "q", "r", "s"}};
  const BaselineResult r = metadata_baseline(m, {1, 0, 1, 1}, 2);
  EXPECT_FALSE(r.columns[1].gap.has_value());
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_NEAR(*r.per_sample.values[1], 0.75, 1e-12);
}

TEST(MetadataBaselineTest, PerSampleValuesStayInConvexHull) {
  std::mt19937_64 rng(21);
  MetadataTable m;
  const std::size_t n = 300;
  m.sample_ids = ids(n);
  m.attribute_names = {"x", "y", "z"};
  m.columns.resize(3);
  std::vector<int> correct(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& col : m.columns) {
      const auto v = rng() % 4;
      col.push_back(v == 3 ? std::nullopt : std::optional<std::string>(std::to_string(v)));
    }
    correct[i] = static_cast<int>(rng() % 3 != 0);
  }
  const BaselineResult r = metadata_baseline(m, correct, 10);
  double lo = 1.0, hi = 0.0;
  for (const auto& col : r.columns)
    for (const auto& g : col.groups) lo = std::min(lo, g.performance), hi = std::max(hi, g.performance);
  for (const auto& v : r.per_sample.values) {
    if (!v) continue;
    EXPECT_GE(*v, lo - 1e-12);
    EXPECT_LE(*v, hi + 1e-12);
  }
}

TEST(SeedMarginalTest, AveragesAcrossAssignments) {
  // Sample 0 sits in a 0.9 subgroup then a 0.5 subgroup.
  std::vector<int> correct(20, 0);
  std::vector<std::size_t> first(20), second(20);
  for (std::size_t i = 0; i < 20; ++i) {
    first[i] = i < 10 ? 0 : 1;
    second[i] = i % 2;
  }
  for (const std::size_t i : {0, 1, 2, 3, 4, 5, 6, 7, 8}) correct[i] = 1;
  // second: evens = {0,2,4,6,8,...} -> 5 correct of 10.
  const SeedMarginal one = seed_marginalized_performance({assignment_of(first, 2)}, correct);
  EXPECT_NEAR(*one.mean.values[0], 0.9, 1e-12);
  const SeedMarginal two =
      seed_marginalized_performance({assignment_of(first, 2), assignment_of(second, 2)}, correct);
  EXPECT_NEAR(*two.mean.values[0], 0.7, 1e-12);
  ASSERT_EQ(two.per_assignment.size(), 2u);
  EXPECT_NEAR(two.per_assignment[1][0], 0.5, 1e-12);

  const SeedMarginal same =
      seed_marginalized_performance({assignment_of(first, 2), assignment_of(first, 2)}, correct);
  EXPECT_EQ(same.mean.values, one.mean.values);
  EXPECT_THROW(seed_marginalized_performance({}, correct), ValidationError);
}

TEST(HistogramTest, ClosedLastBinAndSkipsMissing) {
  const std::vector<std::optional<double>> v = {0.0, 0.49, 0.5, 1.0, std::nullopt};
  EXPECT_EQ(histogram_counts(v, 2), (std::vector<std::size_t>{2, 2}));
  EXPECT_THROW(histogram_counts(v, 0), RangeError);
}

TEST(MetricNameTest, RoundTrip) {
  EXPECT_EQ(parse_metric(to_string(Metric::kBalancedAccuracy)), Metric::kBalancedAccuracy);
  EXPECT_EQ(parse_metric("accuracy"), Metric::kAccuracy);
  EXPECT_THROW(parse_metric("auc"), ValidationError);
}

}  // namespace
}  // namespace hstrat
