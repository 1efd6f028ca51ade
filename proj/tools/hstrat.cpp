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

// hstrat: subgroup discovery and performance audit command line.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hstrat/errors.hpp"
#include "hstrat/ingest.hpp"
#include "hstrat/pipeline.hpp"
#include "hstrat/synthworld.hpp"

namespace {

using namespace hstrat;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Loads embeddings and predictions (plus optional labels/metadata) as one
// validated bundle. Empty inputs skip validation so that an empty split can
// still flow through `assign`.
DatasetBundle load_bundle(const std::string& embeddings, const std::string& predictions,
                          const std::string& labels, const std::string& metadata, Split split) {
  DatasetBundle bundle;
  bundle.split = split;
  bundle.embeddings = load_embeddings(embeddings);
  bundle.predictions = load_predictions(predictions);
  if (!labels.empty()) bundle.labels = load_labels(labels);
  if (!metadata.empty()) bundle.metadata = load_metadata(metadata);
  if (bundle.embeddings.rows() == 0 && bundle.predictions.rows() == 0) return bundle;
  return validate_bundle(std::move(bundle)).bundle();
}

struct FitArgs {
  std::string embeddings;
  std::string predictions;
  std::size_t k = kDefaultSubgroups;
  double gamma = 10.0;
  std::size_t pca_dim = kDefaultPcaDim;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  std::string out;
};

struct AuditArgs {
  std::string labels;
  std::string predictions;
  std::string metadata;
  std::string truth;
  double purity_c = kDefaultPurityCorrection;
  std::size_t min_size = kDefaultMinSize;
  std::string metric = "accuracy";
};

void add_audit_flags(CLI::App* cmd, AuditArgs& a) {
  cmd->add_option("--labels", a.labels, "Test labels CSV")->required();
  cmd->add_option("--metadata", a.metadata, "Test metadata CSV");
  cmd->add_option("--truth", a.truth, "Ground-truth artifact CSV from `synth`");
  cmd->add_option("--purity-c", a.purity_c, "Small-subgroup correction c")->capture_default_str();
  cmd->add_option("--min-size", a.min_size, "Minimum subgroup size counted in gaps")
      ->capture_default_str();
  cmd->add_option("--metric", a.metric, "accuracy | balanced_accuracy")->capture_default_str();
}

AuditConfig audit_config(const AuditArgs& a) {
  AuditConfig config;
  config.metric = parse_metric(a.metric);
  config.purity_c = a.purity_c;
  config.min_size = a.min_size;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgroup discovery and performance audit for black-box classifiers"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a subgroup model on validation data");
  fit_cmd->add_option("--embeddings", fit_args.embeddings, "SEMB or CSV embeddings")->required();
  fit_cmd->add_option("--predictions", fit_args.predictions, "Prediction CSV")->required();
  fit_cmd->add_option("--k", fit_args.k, "Number of subgroups")->capture_default_str();
  fit_cmd->add_option("--gamma", fit_args.gamma, "Prediction weight")->capture_default_str();
  fit_cmd->add_option("--pca-dim", fit_args.pca_dim, "Retained PCA dimension")->capture_default_str();
  fit_cmd->add_option("--restarts", fit_args.restarts, "EM restarts")->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "Model output path")->required();

  std::string model_path, assign_embeddings, assign_predictions, assign_out;
  auto* assign_cmd = app.add_subcommand("assign", "Infer subgroups on held-out data");
  assign_cmd->add_option("--model", model_path, "Model file")->required();
  assign_cmd->add_option("--embeddings", assign_embeddings, "SEMB or CSV embeddings")->required();
  assign_cmd->add_option("--predictions", assign_predictions, "Prediction CSV")->required();
  assign_cmd->add_option("--out", assign_out, "Assignment output path")->required();

  std::string assign_list, report_out;
  AuditArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Audit one or more assignments");
  report_cmd->add_option("--assign", assign_list, "Comma-separated assignment files")->required();
  report_cmd->add_option("--predictions", report_args.predictions, "Test prediction CSV")->required();
  add_audit_flags(report_cmd, report_args);
  report_cmd->add_option("--out", report_out, "Report output path")->required();

  FitArgs sweep_fit;
  AuditArgs sweep_audit;
  std::vector<double> gammas = default_gamma_grid();
  std::vector<std::uint64_t> seeds = default_seeds();
  std::string test_embeddings, sweep_out;
  double delta = kDefaultElbowDelta;
  std::size_t threads = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep gamma and pick the elbow");
  sweep_cmd->add_option("--gammas", gammas, "Gamma grid")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--seeds", seeds, "Seeds")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--embeddings", sweep_fit.embeddings, "Validation embeddings")->required();
  sweep_cmd->add_option("--predictions", sweep_fit.predictions, "Validation predictions")->required();
  sweep_cmd->add_option("--test-embeddings", test_embeddings, "Test embeddings")->required();
  sweep_cmd->add_option("--test-predictions", sweep_audit.predictions, "Test predictions")->required();
  sweep_cmd->add_option("--k", sweep_fit.k, "Number of subgroups")->capture_default_str();
  sweep_cmd->add_option("--pca-dim", sweep_fit.pca_dim, "Retained PCA dimension")->capture_default_str();
  sweep_cmd->add_option("--restarts", sweep_fit.restarts, "EM restarts")->capture_default_str();
  add_audit_flags(sweep_cmd, sweep_audit);
  sweep_cmd->add_option("--delta", delta, "Elbow purity tolerance")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Sweep output path")->required();

  SynthSpec spec;
  std::vector<double> targets(spec.accuracy_targets.begin(), spec.accuracy_targets.end());
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic audit scenario");
  synth_cmd->add_option("--p", spec.p, "Bias level of train/validation")->capture_default_str();
  synth_cmd->add_option("--n-train", spec.n_train)->capture_default_str();
  synth_cmd->add_option("--n-val", spec.n_val)->capture_default_str();
  synth_cmd->add_option("--n-test", spec.n_test)->capture_default_str();
  synth_cmd->add_option("--dim", spec.dim)->capture_default_str();
  synth_cmd->add_option("--separation", spec.separation)->capture_default_str();
  synth_cmd->add_option("--acc-targets", targets, "Four subgroup accuracies")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  synth_cmd->add_option("--positive-fraction", spec.positive_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (fit_cmd->parsed()) {
      const DatasetBundle val =
          load_bundle(fit_args.embeddings, fit_args.predictions, "", "", Split::kValidation);
      FitConfig config;
      config.pca_dim = fit_args.pca_dim;
      config.restarts = fit_args.restarts;
      const SubgroupModel model =
          fit(val.embeddings, val.predictions, fit_args.k, fit_args.gamma, config, fit_args.seed);
      write_model(model, fit_args.out);
    } else if (assign_cmd->parsed()) {
      const SubgroupModel model = load_model(model_path);
      const DatasetBundle test =
          load_bundle(assign_embeddings, assign_predictions, "", "", Split::kTest);
      write_assignment(assign(model, test.embeddings, test.predictions), assign_out);
    } else if (report_cmd->parsed()) {
      std::vector<SubgroupAssignment> assignments;
      for (const auto& path : split_list(assign_list)) assignments.push_back(load_assignment(path));
      AuditData data;
      data.labels = load_labels(report_args.labels);
      data.predictions = load_predictions(report_args.predictions);
      check_labels(data.labels, data.predictions.num_classes());
      if (!report_args.metadata.empty()) data.metadata = load_metadata(report_args.metadata);
      if (!report_args.truth.empty()) data.truth = load_metadata(report_args.truth);
      write_report(report_from_assignments(assignments, data, audit_config(report_args)), report_out);
    } else if (sweep_cmd->parsed()) {
      const DatasetBundle val =
          load_bundle(sweep_fit.embeddings, sweep_fit.predictions, "", "", Split::kValidation);
      const DatasetBundle test = load_bundle(test_embeddings, sweep_audit.predictions,
                                             sweep_audit.labels, sweep_audit.metadata, Split::kTest);
      std::optional<MetadataTable> truth;
      if (!sweep_audit.truth.empty()) truth = load_metadata(sweep_audit.truth);
      SweepConfig config;
      config.k = sweep_fit.k;
      config.fit.pca_dim = sweep_fit.pca_dim;
      config.fit.restarts = sweep_fit.restarts;
      config.audit = audit_config(sweep_audit);
      config.delta = delta;
      config.threads = threads;
      const SweepResult sweep = run_sweep(val, test, truth, gammas, seeds, config);
      write_file(sweep_out, canonical_json(sweep_to_json(sweep, config)));
      std::printf("chosen gamma: %.17g\n", sweep.chosen_gamma);
    } else if (synth_cmd->parsed()) {
      if (targets.size() != 4) throw SpecError("synth: --acc-targets needs exactly four values");
      std::copy(targets.begin(), targets.end(), spec.accuracy_targets.begin());
      write_world(generate_world(spec), synth_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
