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

#include "hstrat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hstrat/errors.hpp"
#include "hstrat/parallel.hpp"
#include "hstrat/synthworld.hpp"

namespace hstrat {
namespace {

using json = nlohmann::json;

json absent() { return json{{"present", false}}; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json performance_json(const SubgroupPerformance& perf) {
  json out = json::array();
  for (const auto& s : perf.subgroups) {
    out.push_back({{"id", s.id},
                   {"size", s.size},
                   {"performance", s.performance},
                   {"included_in_gap", s.included_in_gap}});
  }
  return out;
}

json purity_json(const PurityBreakdown& purity) {
  json columns = json::array();
  for (const auto& col : purity.columns) {
    json subgroups = json::array();
    for (const auto& s : col.subgroups) {
      subgroups.push_back({{"id", s.id},
                           {"counted", s.counted},
                           {"majority", s.majority ? json(*s.majority) : json(nullptr)},
                           {"purity", s.purity}});
    }
    json values = json::array();
    for (const auto& v : col.values) {
      values.push_back({{"value", v.value},
                        {"best_subgroup", v.best_subgroup ? json(*v.best_subgroup) : json(nullptr)},
                        {"contribution", v.contribution}});
    }
    columns.push_back({{"attribute", col.attribute},
                       {"average_purity", col.average_purity},
                       {"subgroups", std::move(subgroups)},
                       {"values", std::move(values)}});
  }
  return {{"present", true},
          {"correction", purity.correction},
          {"average_purity", purity.average_purity},
          {"columns", std::move(columns)}};
}

json per_sample_json(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(optional_json(v));
  return out;
}

json per_sample_json(const std::vector<double>& values) {
  json out = json::array();
  for (const double v : values) out.push_back(v);
  return out;
}

std::vector<std::string> truth_artifacts() {
  return {std::string(kKnownArtifact), std::string(kHiddenArtifact)};
}

// Accuracy gap of the division induced by one categorical column; missing
// cells are left out.
double column_gap(const MetadataTable::Column& column, const std::vector<int>& correct) {
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> groups;
  std::vector<int> kept;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!column[i]) continue;
    const auto [it, inserted] = index.try_emplace(*column[i], index.size());
    groups.push_back(it->second);
    kept.push_back(correct[i]);
  }
  return performance_gap(division_performance(groups, kept, {}, Metric::kAccuracy, 1));
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

void check_audit_data(const AuditData& data) {
  check_aligned(data.labels.sample_ids, data.predictions.sample_ids, "predictions");
  if (data.metadata) check_aligned(data.labels.sample_ids, data.metadata->sample_ids, "metadata");
  if (data.truth) check_aligned(data.labels.sample_ids, data.truth->sample_ids, "truth");
}

ReportDocument report_from_assignments(const std::vector<SubgroupAssignment>& assignments,
                                       const AuditData& data, const AuditConfig& config) {
  if (assignments.empty()) throw ValidationError("report: no assignments given");
  check_audit_data(data);
  const std::vector<int> correct = correctness(data.labels, data.predictions);

  json runs = json::array();
  json seeds = json::array();
  json warnings = json::array();
  std::vector<double> gaps;
  std::vector<double> metadata_purity;
  std::vector<double> truth_purity;
  for (std::size_t r = 0; r < assignments.size(); ++r) {
    const SubgroupAssignment& a = assignments[r];
    const SubgroupPerformance perf =
        subgroup_performance(a, data.labels, data.predictions, config.metric, config.min_size);
    json run;
    run["seed"] = a.seed;
    run["gamma"] = a.gamma;
    run["n_components"] = a.n_components;
    run["subgroups"] = performance_json(perf);
    try {
      const double gap = performance_gap(perf);
      gaps.push_back(gap);
      run["gap"] = gap;
    } catch (const EmptyDivisionError&) {
      run["gap"] = nullptr;
      warnings.push_back("run " + std::to_string(r) + ": no subgroup reaches the minimum size");
    }
    if (data.metadata) {
      const PurityBreakdown p =
          average_purity(a, *data.metadata, data.metadata->attribute_names, config.purity_c);
      metadata_purity.push_back(p.average_purity);
      run["metadata_purity"] = purity_json(p);
    } else {
      run["metadata_purity"] = absent();
    }
    if (data.truth) {
      const PurityBreakdown p = average_purity(a, *data.truth, truth_artifacts(), config.purity_c);
      truth_purity.push_back(p.average_purity);
      run["truth_purity"] = purity_json(p);
    } else {
      run["truth_purity"] = absent();
    }
    seeds.push_back(a.seed);
    runs.push_back(std::move(run));
  }

  const SeedMarginal marginal = seed_marginalized_performance(assignments, correct);
  json discovered;
  discovered["runs"] = std::move(runs);
  discovered["mean_gap"] = gaps.empty() ? json(nullptr) : json(mean_of(gaps));
  discovered["mean_metadata_purity"] =
      metadata_purity.empty() ? json(nullptr) : json(mean_of(metadata_purity));
  discovered["mean_truth_purity"] = truth_purity.empty() ? json(nullptr) : json(mean_of(truth_purity));
  discovered["per_sample"] = per_sample_json(marginal.mean.values);
  discovered["histogram"] = histogram_counts(marginal.mean.values, kHistogramBins);
  json per_run_samples = json::array();
  for (const auto& values : marginal.per_assignment) per_run_samples.push_back(per_sample_json(values));
  discovered["per_run_per_sample"] = std::move(per_run_samples);

  json baseline = absent();
  if (data.metadata) {
    const BaselineResult b = metadata_baseline(*data.metadata, correct, config.min_size);
    json columns = json::array();
    std::optional<double> widest;
    for (const auto& col : b.columns) {
      json groups = json::array();
      for (const auto& g : col.groups) {
        groups.push_back({{"value", g.value},
                          {"size", g.size},
                          {"performance", g.performance},
                          {"included_in_gap", g.included_in_gap}});
      }
      columns.push_back({{"attribute", col.attribute}, {"gap", optional_json(col.gap)},
                         {"groups", std::move(groups)}});
      if (col.gap) widest = std::max(widest.value_or(*col.gap), *col.gap);
    }
    baseline = {{"present", true},
                {"columns", std::move(columns)},
                {"max_gap", optional_json(widest)},
                {"per_sample", per_sample_json(b.per_sample.values)},
                {"histogram", histogram_counts(b.per_sample.values, kHistogramBins)},
                {"warnings", b.warnings}};
  }

  json truth = absent();
  if (data.truth) {
    truth = {{"present", true},
             {"true_gap", column_gap(data.truth->column(kTruthSubgroup), correct)},
             {"known_only_gap", column_gap(data.truth->column(kKnownArtifact), correct)}};
  }

  double overall = 0.0;
  for (const int c : correct) overall += c;
  overall /= static_cast<double>(std::max<std::size_t>(correct.size(), 1));

  ReportDocument report;
  json& body = report.body;
  body["format"] = "hstrat-report";
  body["version"] = 1;
  body["config"] = {{"metric", std::string(to_string(config.metric))},
                    {"purity_c", config.purity_c},
                    {"min_size", config.min_size},
                    {"histogram_bins", kHistogramBins}};
  body["n_samples"] = data.labels.size();
  body["overall_accuracy"] = overall;
  body["seeds"] = std::move(seeds);
  body["sample_ids"] = data.labels.sample_ids;
  body["discovered"] = std::move(discovered);
  body["baseline"] = std::move(baseline);
  body["truth"] = std::move(truth);
  body["warnings"] = std::move(warnings);
  return report;
}

ReportDocument run_report(const std::vector<SubgroupModel>& models, const DatasetBundle& test,
                          const std::optional<MetadataTable>& truth, const AuditConfig& config) {
  if (!test.labels) throw ValidationError("report: test bundle has no labels");
  std::vector<SubgroupAssignment> assignments;
  assignments.reserve(models.size());
  for (const auto& model : models) {
    assignments.push_back(assign(model, test.embeddings, test.predictions));
  }
  AuditData data{*test.labels, test.predictions, test.metadata, truth};
  return report_from_assignments(assignments, data, config);
}

double choose_gamma(const std::vector<double>& grid, const std::vector<double>& purity, double delta) {
  if (grid.empty()) throw ValidationError("sweep: empty gamma grid");
  if (grid.size() != purity.size()) throw AlignmentError("sweep: grid and purity lengths differ");
  if (!std::isfinite(delta) || delta < 0.0) throw RangeError("sweep: delta must be >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("sweep: gamma grid must be strictly increasing");
  }
  const double best = *std::max_element(purity.begin(), purity.end());
  // Absorbs rounding in best - delta so that values on the boundary qualify.
  const double threshold = best - delta - 1e-12;
  double chosen = grid.front();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (purity[i] >= threshold) chosen = grid[i];
  }
  return chosen;
}

SweepResult run_sweep(const DatasetBundle& validation, const DatasetBundle& test,
                      const std::optional<MetadataTable>& truth,
                      const std::vector<double>& gamma_grid, const std::vector<std::uint64_t>& seeds,
                      const SweepConfig& config) {
  if (gamma_grid.empty()) throw ValidationError("sweep: empty gamma grid");
  if (seeds.empty()) throw ValidationError("sweep: no seeds");
  for (std::size_t i = 1; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] > gamma_grid[i - 1])) {
      throw ValidationError("sweep: gamma grid must be strictly increasing");
    }
  }
  if (!test.labels) throw ValidationError("sweep: test bundle has no labels");
  if (truth) check_aligned(test.embeddings.sample_ids, truth->sample_ids, "truth");

  SweepResult result;
  result.delta = config.delta;
  const MetadataTable* purity_table = nullptr;
  std::vector<std::string> attributes;
  if (truth) {
    purity_table = &*truth;
    attributes = truth_artifacts();
    result.purity_source = "truth";
  } else if (test.metadata) {
    purity_table = &*test.metadata;
    attributes = test.metadata->attribute_names;
    result.purity_source = "metadata";
  } else {
    throw ValidationError("sweep: purity needs a truth table or test metadata");
  }

  const std::size_t n_seeds = seeds.size();
  std::vector<SeedOutcome> outcomes(gamma_grid.size() * n_seeds);
  FitConfig fit_config = config.fit;
  fit_config.threads = 1;
  parallel_for(outcomes.size(), config.threads, [&](std::size_t job) {
    const double gamma = gamma_grid[job / n_seeds];
    const std::uint64_t seed = seeds[job % n_seeds];
    const SubgroupModel model =
        fit(validation.embeddings, validation.predictions, config.k, gamma, fit_config, seed);
    const SubgroupAssignment a = assign(model, test.embeddings, test.predictions);
    SeedOutcome& out = outcomes[job];
    out.seed = seed;
    out.log_likelihood = model.diagnostics.log_likelihood;
    out.subgroups = subgroup_performance(a, *test.labels, test.predictions, config.audit.metric,
                                         config.audit.min_size);
    out.gap = performance_gap(out.subgroups);
    out.purity = average_purity(a, *purity_table, attributes, config.audit.purity_c).average_purity;
  });

  std::vector<double> purities;
  for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
    SweepPoint point;
    point.gamma = gamma_grid[g];
    std::vector<double> gaps;
    std::vector<double> purity;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      point.per_seed.push_back(std::move(outcomes[g * n_seeds + s]));
      gaps.push_back(point.per_seed.back().gap);
      purity.push_back(point.per_seed.back().purity);
    }
    point.mean_gap = mean_of(gaps);
    point.mean_purity = mean_of(purity);
    purities.push_back(point.mean_purity);
    result.points.push_back(std::move(point));
  }
  result.chosen_gamma = choose_gamma(gamma_grid, purities, config.delta);
  return result;
}

json sweep_to_json(const SweepResult& sweep, const SweepConfig& config) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    json per_seed = json::array();
    for (const auto& s : p.per_seed) {
      per_seed.push_back({{"seed", s.seed},
                          {"gap", s.gap},
                          {"purity", s.purity},
                          {"log_likelihood", s.log_likelihood},
                          {"subgroups", performance_json(s.subgroups)}});
    }
    points.push_back({{"gamma", p.gamma},
                      {"mean_gap", p.mean_gap},
                      {"mean_purity", p.mean_purity},
                      {"per_seed", std::move(per_seed)}});
  }
  json doc;
  doc["format"] = "hstrat-sweep";
  doc["version"] = 1;
  doc["k"] = config.k;
  doc["pca_dim"] = config.fit.pca_dim;
  doc["restarts"] = config.fit.restarts;
  doc["metric"] = std::string(to_string(config.audit.metric));
  doc["purity_c"] = config.audit.purity_c;
  doc["min_size"] = config.audit.min_size;
  doc["delta"] = sweep.delta;
  doc["purity_source"] = sweep.purity_source;
  doc["chosen_gamma"] = sweep.chosen_gamma;
  doc["elbow_rule"] = "largest gamma whose seed-averaged purity is within delta of the grid maximum";
  doc["points"] = std::move(points);
  return doc;
}

}  // namespace hstrat
