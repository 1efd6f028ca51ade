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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hstrat/errors.hpp"

namespace hstrat {

std::string_view to_string(Metric metric) {
  return metric == Metric::kAccuracy ? "accuracy" : "balanced_accuracy";
}

Metric parse_metric(std::string_view name) {
  if (name == "accuracy") return Metric::kAccuracy;
  if (name == "balanced_accuracy") return Metric::kBalancedAccuracy;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

std::size_t SubgroupPerformance::total_size() const {
  std::size_t total = 0;
  for (const auto& s : subgroups) total += s.size;
  return total;
}

std::vector<int> correctness(const LabelVector& labels, const PredictionMatrix& predictions) {
  check_aligned(labels.sample_ids, predictions.sample_ids, "predictions");
  if (labels.labels.size() != predictions.rows()) {
    throw AlignmentError("correctness: label and prediction counts differ");
  }
  std::vector<int> correct(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto predicted = argmax(row_span(predictions.probs, static_cast<Eigen::Index>(i)));
    correct[i] = static_cast<int>(predicted) == labels.labels[i] ? 1 : 0;
  }
  return correct;
}

SubgroupPerformance division_performance(const std::vector<std::size_t>& groups,
                                         const std::vector<int>& correct,
                                         const std::vector<int>& labels, Metric metric,
                                         std::size_t min_size) {
  if (groups.size() != correct.size()) {
    throw AlignmentError("division: group and correctness lengths differ");
  }
  if (metric == Metric::kBalancedAccuracy && labels.size() != groups.size()) {
    throw AlignmentError("division: balanced accuracy needs one label per sample");
  }
  if (groups.empty()) throw EmptyDivisionError("division has no subgroups");

  struct Tally {
    std::size_t size = 0;
    std::size_t hits = 0;
    std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // label -> (size, hits)
  };
  std::map<std::size_t, Tally> tallies;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    Tally& t = tallies[groups[i]];
    ++t.size;
    t.hits += correct[i] ? 1 : 0;
    if (metric == Metric::kBalancedAccuracy) {
      auto& cls = t.per_class[labels[i]];
      ++cls.first;
      cls.second += correct[i] ? 1 : 0;
    }
  }

  SubgroupPerformance perf;
  perf.subgroups.reserve(tallies.size());
  for (const auto& [id, t] : tallies) {
    SubgroupStat stat;
    stat.id = id;
    stat.size = t.size;
    if (metric == Metric::kAccuracy) {
      stat.performance = static_cast<double>(t.hits) / static_cast<double>(t.size);
    } else {
      double sum = 0.0;
      for (const auto& [label, cls] : t.per_class) {
        sum += static_cast<double>(cls.second) / static_cast<double>(cls.first);
      }
      stat.performance = sum / static_cast<double>(t.per_class.size());
    }
    stat.included_in_gap = t.size >= min_size;
    perf.subgroups.push_back(stat);
  }
  return perf;
}

SubgroupPerformance subgroup_performance(const SubgroupAssignment& assignment,
                                         const LabelVector& labels,
                                         const PredictionMatrix& predictions, Metric metric,
                                         std::size_t min_size) {
  check_aligned(assignment.sample_ids, labels.sample_ids, "labels");
  return division_performance(assignment.hard_labels, correctness(labels, predictions),
                              labels.labels, metric, min_size);
}

double performance_gap(const SubgroupPerformance& perf) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& s : perf.subgroups) {
    if (!s.included_in_gap) continue;
    if (!any) {
      lo = hi = s.performance;
      any = true;
    } else {
      lo = std::min(lo, s.performance);
      hi = std::max(hi, s.performance);
    }
  }
  if (!any) throw EmptyDivisionError("no subgroup meets the minimum size");
  return hi - lo;
}

PurityBreakdown division_purity(const std::vector<std::size_t>& groups,
                                const MetadataTable& metadata,
                                const std::vector<std::string>& attribute_set, double c) {
  if (groups.size() != metadata.rows()) {
    throw AlignmentError("purity: group count does not match metadata rows");
  }
  if (attribute_set.empty()) throw UnknownAttributeError("purity: empty attribute set");
  if (!std::isfinite(c) || c < 0.0) throw RangeError("purity: correction must be >= 0");

  const std::set<std::size_t> ids(groups.begin(), groups.end());
  PurityBreakdown out;
  out.correction = c;
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& name : attribute_set) {
    const auto& column = metadata.column(name);
    ColumnPurity col;
    col.attribute = name;

    std::map<std::size_t, std::map<std::string, std::size_t>> counts;
    std::set<std::string> values;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (!column[i]) continue;
      ++counts[groups[i]][*column[i]];
      values.insert(*column[i]);
    }

    std::map<std::string, ValueContribution> best;
    for (const auto& v : values) best[v].value = v;
    for (const std::size_t id : ids) {
      SubgroupPurity sp;
      sp.id = id;
      const auto it = counts.find(id);
      if (it != counts.end()) {
        std::size_t top = 0;
        for (const auto& [value, n] : it->second) {
          sp.counted += n;
          if (n > top) {
            top = n;
            sp.majority = value;
          }
        }
        sp.purity = static_cast<double>(top) / static_cast<double>(sp.counted);
        const double score = static_cast<double>(top) / (static_cast<double>(sp.counted) + c);
        ValueContribution& slot = best[*sp.majority];
        if (!slot.best_subgroup || score > slot.contribution) {
          slot.contribution = score;
          slot.best_subgroup = id;
        }
      }
      col.subgroups.push_back(std::move(sp));
    }

    double column_total = 0.0;
    for (auto& [value, contribution] : best) {
      column_total += contribution.contribution;
      col.values.push_back(std::move(contribution));
    }
    if (!col.values.empty()) {
      col.average_purity = column_total / static_cast<double>(col.values.size());
    }
    total += column_total;
    pairs += col.values.size();
    out.columns.push_back(std::move(col));
  }
  if (pairs == 0) throw EmptyDivisionError("purity: every attribute value is missing");
  out.average_purity = total / static_cast<double>(pairs);
  return out;
}

PurityBreakdown average_purity(const SubgroupAssignment& assignment, const MetadataTable& metadata,
                               const std::vector<std::string>& attribute_set, double c) {
  check_aligned(assignment.sample_ids, metadata.sample_ids, "metadata");
  return division_purity(assignment.hard_labels, metadata, attribute_set, c);
}

BaselineResult metadata_baseline(const MetadataTable& metadata, const std::vector<int>& correct,
                                 std::size_t min_size) {
  if (metadata.attribute_names.empty()) {
    throw ValidationError("baseline: metadata has no attribute columns");
  }
  if (correct.size() != metadata.rows()) {
    throw AlignmentError("baseline: correctness length does not match metadata rows");
  }
  const std::size_t n = metadata.rows();
  BaselineResult out;
  out.per_sample.sample_ids = metadata.sample_ids;
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);

  for (std::size_t c = 0; c < metadata.columns.size(); ++c) {
    const auto& column = metadata.columns[c];
    ColumnBaseline col;
    col.attribute = metadata.attribute_names[c];
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // value -> (size, hits)
    for (std::size_t i = 0; i < n; ++i) {
      if (!column[i]) continue;
      auto& t = tally[*column[i]];
      ++t.first;
      t.second += correct[i] ? 1 : 0;
    }
    std::map<std::string, double> performance;
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& [value, t] : tally) {
      AttributeGroup g;
      g.value = value;
      g.size = t.first;
      g.performance = static_cast<double>(t.second) / static_cast<double>(t.first);
      g.included_in_gap = g.size >= min_size;
      performance[value] = g.performance;
      if (g.included_in_gap) {
        lo = any ? std::min(lo, g.performance) : g.performance;
        hi = any ? std::max(hi, g.performance) : g.performance;
        any = true;
      }
      col.groups.push_back(std::move(g));
    }
    if (any) {
      col.gap = hi - lo;
      for (std::size_t i = 0; i < n; ++i) {
        if (!column[i]) continue;
        sums[i] += performance[*column[i]];
        ++counts[i];
      }
    } else {
      out.warnings.push_back("attribute '" + col.attribute + "' skipped: no group has at least " +
                             std::to_string(min_size) + " samples");
    }
    out.columns.push_back(std::move(col));
  }

  out.per_sample.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) out.per_sample.values[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return out;
}

SeedMarginal seed_marginalized_performance(const std::vector<SubgroupAssignment>& assignments,
                                           const std::vector<int>& correct) {
  if (assignments.empty()) throw ValidationError("marginalization: no assignments");
  const SampleIds& ids = assignments.front().sample_ids;
  if (correct.size() != ids.size()) {
    throw AlignmentError("marginalization: correctness length does not match samples");
  }
  SeedMarginal out;
  out.mean.sample_ids = ids;
  std::vector<double> sums(ids.size(), 0.0);
  for (const auto& a : assignments) {
    check_aligned(ids, a.sample_ids, "assignment");
    const SubgroupPerformance perf = division_performance(a.hard_labels, correct, {},
                                                          Metric::kAccuracy, 0);
    std::map<std::size_t, double> by_id;
    for (const auto& s : perf.subgroups) by_id[s.id] = s.performance;
    std::vector<double> values(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      values[i] = by_id[a.hard_labels[i]];
      sums[i] += values[i];
    }
    out.per_assignment.push_back(std::move(values));
  }
  out.mean.values.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.mean.values[i] = sums[i] / static_cast<double>(assignments.size());
  }
  return out;
}

std::vector<std::size_t> histogram_counts(const std::vector<std::optional<double>>& values,
                                          std::size_t bins) {
  if (bins < 1) throw RangeError("histogram: need at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& v : values) {
    if (!v) continue;
    const double clamped = std::clamp(*v, 0.0, 1.0);
    const auto bin = std::min(static_cast<std::size_t>(clamped * static_cast<double>(bins)), bins - 1);
    ++counts[bin];
  }
  return counts;
}

}  // namespace hstrat
