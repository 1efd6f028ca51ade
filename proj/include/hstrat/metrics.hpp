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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hstrat/datamodel.hpp"
#include "hstrat/mixture.hpp"

namespace hstrat {

enum class Metric { kAccuracy, kBalancedAccuracy };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

inline constexpr double kDefaultPurityCorrection = 10.0;
inline constexpr std::size_t kDefaultMinSize = 20;

struct SubgroupStat {
  std::size_t id = 0;
  std::size_t size = 0;
  double performance = 0.0;
  bool included_in_gap = false;
};

// Non-empty subgroups of a division, ordered by id.
struct SubgroupPerformance {
  std::vector<SubgroupStat> subgroups;

  std::size_t total_size() const;
};

// 1 where argmax(prediction row) == label, else 0.
std::vector<int> correctness(const LabelVector& labels, const PredictionMatrix& predictions);

// Performance of an arbitrary integer-keyed division. `labels` is only read
// for balanced accuracy.
SubgroupPerformance division_performance(const std::vector<std::size_t>& groups,
                                         const std::vector<int>& correct,
                                         const std::vector<int>& labels, Metric metric,
                                         std::size_t min_size);

SubgroupPerformance subgroup_performance(const SubgroupAssignment& assignment,
                                         const LabelVector& labels,
                                         const PredictionMatrix& predictions, Metric metric,
                                         std::size_t min_size);

// max - min performance over subgroups flagged included_in_gap.
double performance_gap(const SubgroupPerformance& perf);

struct SubgroupPurity {
  std::size_t id = 0;
  std::size_t counted = 0;  // members with a non-missing value
  std::optional<std::string> majority;
  double purity = 0.0;  // majority count / counted, uncorrected
};

struct ValueContribution {
  std::string value;
  std::optional<std::size_t> best_subgroup;
  double contribution = 0.0;  // max over S_a of n_{s,a} / (n_s + c), 0 if S_a empty
};

struct ColumnPurity {
  std::string attribute;
  std::vector<SubgroupPurity> subgroups;
  std::vector<ValueContribution> values;  // sorted by value
  double average_purity = 0.0;            // mean contribution within this column
};

struct PurityBreakdown {
  double correction = 0.0;
  std::vector<ColumnPurity> columns;
  // Mean contribution over every (attribute, value) pair of the named columns.
  double average_purity = 0.0;
};

// Size-corrected average purity of a division against categorical attributes.
// Each subgroup's majority value is determined per column, ignoring missing
// cells; ties go to the lexicographically smallest value.
PurityBreakdown average_purity(const SubgroupAssignment& assignment, const MetadataTable& metadata,
                               const std::vector<std::string>& attribute_set, double c);

// Same computation over raw group ids aligned with the metadata rows.
PurityBreakdown division_purity(const std::vector<std::size_t>& groups,
                                const MetadataTable& metadata,
                                const std::vector<std::string>& attribute_set, double c);

struct PerSamplePerformance {
  SampleIds sample_ids;
  // std::nullopt when no stratification covers the sample.
  std::vector<std::optional<double>> values;
};

struct AttributeGroup {
  std::string value;
  std::size_t size = 0;
  double performance = 0.0;
  bool included_in_gap = false;
};

struct ColumnBaseline {
  std::string attribute;
  std::vector<AttributeGroup> groups;  // sorted by value
  // Unset when no group reaches min_size; such a column is skipped.
  std::optional<double> gap;
};

struct BaselineResult {
  std::vector<ColumnBaseline> columns;
  PerSamplePerformance per_sample;
  std::vector<std::string> warnings;
};

// Traditional metadata stratification: each column is its own division. A
// sample's value is the mean accuracy of its groups over the non-skipped
// columns where it is not missing.
BaselineResult metadata_baseline(const MetadataTable& metadata, const std::vector<int>& correct,
                                 std::size_t min_size);

struct SeedMarginal {
  std::vector<std::vector<double>> per_assignment;  // per-sample subgroup accuracy
  PerSamplePerformance mean;
};

// Averages, per sample, the accuracy of the subgroup it falls in across
// several assignments of the same samples.
SeedMarginal seed_marginalized_performance(const std::vector<SubgroupAssignment>& assignments,
                                           const std::vector<int>& correct);

// Counts of values falling into `bins` equal-width bins over [0, 1]; the last
// bin is closed on the right. Missing values are skipped.
std::vector<std::size_t> histogram_counts(const std::vector<std::optional<double>>& values,
                                          std::size_t bins);

}  // namespace hstrat
