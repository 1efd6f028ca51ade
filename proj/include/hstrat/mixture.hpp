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
#include <random>
#include <span>
#include <vector>

#include "hstrat/datamodel.hpp"
#include "hstrat/pca.hpp"

namespace hstrat {

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kCategoricalFloor = 1e-8;
// Components whose responsibility mass falls below this are treated as empty.
inline constexpr double kEmptyComponentMass = 1e-3;
inline constexpr std::size_t kDefaultSubgroups = 15;

// Parameters of the label-free subgroup mixture.
//
// Component j scores a sample (z, yhat) by
//
//   log priors(j) + sum_d log N(z_d; means(j,d), variances(j,d))
//                 + gamma * sum_c yhat_c * log pred_params(j,c)
//
// i.e. a diagonal Gaussian over the reduced embedding times a categorical
// likelihood of the soft prediction raised to the power gamma.
struct MixtureParams {
  Vector priors;       // k
  Matrix means;        // k x q
  Matrix variances;    // k x q
  Matrix pred_params;  // k x classes
  double gamma = 0.0;

  std::size_t n_components() const { return static_cast<std::size_t>(priors.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(pred_params.cols()); }

  friend bool operator==(const MixtureParams& a, const MixtureParams& b);
};

// Throws when shapes disagree or a floor/simplex invariant is violated.
void check_params(const MixtureParams& params);

// Maximizer of sum_c weights_c * log theta_c over the simplex with every
// theta_c >= floor. Zero total weight yields the uniform distribution.
Vector project_to_floored_simplex(const Vector& weights, double floor);

double joint_log_density(const MixtureParams& params, std::span<const double> z,
                         std::span<const double> yhat, std::size_t component);

struct EStepResult {
  Matrix responsibilities;  // n x k, rows on the simplex
  double log_likelihood = 0.0;
};

EStepResult e_step(const MixtureParams& params, const Matrix& z, const Matrix& yhat);

struct MStepResult {
  MixtureParams params;
  // Components whose mass fell below kEmptyComponentMass.
  std::vector<std::size_t> empty_components;
};

// Closed-form maximizer of the expected complete-data objective. A component
// with exactly zero mass gets the pooled statistics and prior zero.
MStepResult m_step(const Matrix& responsibilities, const Matrix& z, const Matrix& yhat,
                   double gamma);

struct FitConfig {
  std::size_t pca_dim = kDefaultPcaDim;
  std::size_t restarts = 5;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // relative log-likelihood improvement
  std::size_t max_rescues = 3;
  std::size_t threads = 1;
};

struct EmTrace {
  // Log-likelihood of the initial parameters followed by one entry per
  // completed iteration.
  std::vector<double> log_likelihoods;
  std::size_t iterations = 0;
  std::size_t rescue_attempts = 0;
  std::size_t rescues_accepted = 0;
  bool converged = false;
};

struct EmRun {
  MixtureParams params;
  EmTrace trace;
};

// Seeds means by k-means++ over the reduced embeddings. The seeding distance
// adds gamma times the squared distance between prediction rows, so that
// samples with identical embeddings but different predictions can still be
// split. Variances start at the pooled per-dimension variance, priors
// uniform, and each categorical at the midpoint of the pooled mean
// prediction and its seed sample's prediction.
MixtureParams initialize_params(const Matrix& z, const Matrix& yhat, std::size_t k, double gamma,
                                std::mt19937_64& rng);

// EM from fixed starting parameters until the relative improvement drops
// below config.tolerance or config.max_iterations is reached.
EmRun run_em(const Matrix& z, const Matrix& yhat, MixtureParams init, const FitConfig& config);

struct FitDiagnostics {
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  std::size_t restart = 0;
  bool converged = false;

  friend bool operator==(const FitDiagnostics&, const FitDiagnostics&) = default;
};

struct SubgroupModel {
  PcaModel pca;
  MixtureParams params;
  FitDiagnostics diagnostics;
  std::uint64_t seed = 0;

  friend bool operator==(const SubgroupModel&, const SubgroupModel&) = default;
};

// Reduces z_val with PCA and keeps the best of config.restarts EM runs.
// `traces`, when given, receives one trace per restart in restart order.
SubgroupModel fit(const EmbeddingMatrix& z_val, const PredictionMatrix& yhat_val, std::size_t k,
                  double gamma, const FitConfig& config, std::uint64_t seed,
                  std::vector<EmTrace>* traces = nullptr);

struct SubgroupAssignment {
  SampleIds sample_ids;
  std::vector<std::size_t> hard_labels;
  Matrix responsibilities;
  std::size_t n_components = 0;
  // Provenance of the model that produced the assignment.
  double gamma = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return hard_labels.size(); }

  friend bool operator==(const SubgroupAssignment& a, const SubgroupAssignment& b);
};

// Projects with the stored PCA and runs one E-step with frozen parameters.
SubgroupAssignment assign(const SubgroupModel& model, const EmbeddingMatrix& z_test_raw,
                          const PredictionMatrix& yhat_test);

// Hard labels from a responsibility matrix, lowest index on ties.
std::vector<std::size_t> hard_labels_from(const Matrix& responsibilities);

}  // namespace hstrat
