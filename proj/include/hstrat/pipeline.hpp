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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hstrat/datamodel.hpp"
#include "hstrat/ingest.hpp"
#include "hstrat/metrics.hpp"
#include "hstrat/mixture.hpp"

namespace hstrat {

inline constexpr double kDefaultElbowDelta = 0.02;
inline constexpr std::size_t kHistogramBins = 20;

inline const std::vector<double>& default_gamma_grid() {
  static const std::vector<double> grid = {0, 1, 5, 10, 20, 50, 100};
  return grid;
}
inline const std::vector<std::uint64_t>& default_seeds() {
  static const std::vector<std::uint64_t> seeds = {0, 1, 2};
  return seeds;
}

struct AuditConfig {
  Metric metric = Metric::kAccuracy;
  double purity_c = kDefaultPurityCorrection;
  std::size_t min_size = kDefaultMinSize;
};

// Everything the audit needs about the held-out split. `truth` is the
// synthetic ground-truth table (artifact_known, artifact_hidden, subgroup).
struct AuditData {
  LabelVector labels;
  PredictionMatrix predictions;
  std::optional<MetadataTable> metadata;
  std::optional<MetadataTable> truth;
};

// Checks that labels, predictions and optional tables describe the same
// samples in the same order.
void check_audit_data(const AuditData& data);

// One document for a set of assignments of the same test samples (one per
// seed and/or encoder): per-run subgroup tables with gap and purity, seed
// averages, per-sample accuracies for discovered and metadata strata, and
// ground-truth gaps when a truth table is supplied. Sections whose inputs
// are missing are marked {"present": false}.
ReportDocument report_from_assignments(const std::vector<SubgroupAssignment>& assignments,
                                       const AuditData& data, const AuditConfig& config);

// Assigns the test bundle with every model, then builds the report.
ReportDocument run_report(const std::vector<SubgroupModel>& models, const DatasetBundle& test,
                          const std::optional<MetadataTable>& truth, const AuditConfig& config);

struct SweepConfig {
  std::size_t k = kDefaultSubgroups;
  FitConfig fit;
  AuditConfig audit;
  double delta = kDefaultElbowDelta;
  std::size_t threads = 1;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double gap = 0.0;
  double purity = 0.0;
  SubgroupPerformance subgroups;
  double log_likelihood = 0.0;
};

struct SweepPoint {
  double gamma = 0.0;
  std::vector<SeedOutcome> per_seed;
  double mean_gap = 0.0;
  double mean_purity = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double chosen_gamma = 0.0;
  double delta = kDefaultElbowDelta;
  std::string purity_source;  // "truth" or "metadata"
};

// Largest grid value whose purity is within `delta` of the best purity on
// the grid. `grid` must be strictly increasing and as long as `purity`.
double choose_gamma(const std::vector<double>& grid, const std::vector<double>& purity, double delta);

// Fits on validation and audits on test for every (gamma, seed) pair.
// Purity is measured against the truth artifacts when available, otherwise
// against every metadata column.
SweepResult run_sweep(const DatasetBundle& validation, const DatasetBundle& test,
                      const std::optional<MetadataTable>& truth,
                      const std::vector<double>& gamma_grid, const std::vector<std::uint64_t>& seeds,
                      const SweepConfig& config);

nlohmann::json sweep_to_json(const SweepResult& sweep, const SweepConfig& config);

}  // namespace hstrat
