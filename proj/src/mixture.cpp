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

#include "hstrat/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hstrat/errors.hpp"
#include "hstrat/parallel.hpp"

namespace hstrat {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

// Component-only part of the Gaussian log density: log prior minus the
// normalizing constant.
double component_offset(const MixtureParams& params, Eigen::Index j) {
  double offset = std::log(params.priors(j));
  for (Eigen::Index d = 0; d < params.means.cols(); ++d) {
    offset -= 0.5 * (kLog2Pi + std::log(params.variances(j, d)));
  }
  return offset;
}

double score(const MixtureParams& params, Eigen::Index j, double offset, const double* z,
             const double* yhat) {
  const Eigen::Index q = params.means.cols();
  const double* mu = params.means.data() + j * q;
  const double* var = params.variances.data() + j * q;
  double quad = 0.0;
  for (Eigen::Index d = 0; d < q; ++d) {
    const double diff = z[d] - mu[d];
    quad += diff * diff / var[d];
  }
  double value = offset - 0.5 * quad;
  if (params.gamma != 0.0) {
    const Eigen::Index classes = params.pred_params.cols();
    const double* theta = params.pred_params.data() + j * classes;
    double cross = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) cross += yhat[c] * std::log(theta[c]);
    value += params.gamma * cross;
  }
  return value;
}

void check_shapes(const MixtureParams& params, const Matrix& z, const Matrix& yhat) {
  if (z.rows() != yhat.rows()) {
    throw DimensionError("mixture: " + std::to_string(z.rows()) + " embedding rows vs " +
                         std::to_string(yhat.rows()) + " prediction rows");
  }
  if (static_cast<std::size_t>(z.cols()) != params.dim()) {
    throw DimensionError("mixture: embeddings have " + std::to_string(z.cols()) +
                         " columns, model expects " + std::to_string(params.dim()));
  }
  if (static_cast<std::size_t>(yhat.cols()) != params.num_classes()) {
    throw DimensionError("mixture: predictions have " + std::to_string(yhat.cols()) +
                         " classes, model expects " + std::to_string(params.num_classes()));
  }
}

struct Pooled {
  Vector variance;
  Vector mean_prediction;
  Vector mean;
};

Pooled pooled_statistics(const Matrix& z, const Matrix& yhat) {
  Pooled pooled;
  const double n = static_cast<double>(z.rows());
  pooled.mean = z.colwise().sum().transpose() / n;
  pooled.variance = ((z.rowwise() - pooled.mean.transpose()).array().square().colwise().sum() / n)
                        .transpose()
                        .cwiseMax(kVarianceFloor);
  pooled.mean_prediction = yhat.colwise().sum().transpose() / n;
  return pooled;
}

std::size_t least_explained_sample(const Matrix& responsibilities) {
  std::size_t best = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    const double top = responsibilities.row(i).maxCoeff();
    if (top < lowest) {
      lowest = top;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

}  // namespace

bool operator==(const MixtureParams& a, const MixtureParams& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return a.gamma == b.gamma && same(a.priors, b.priors) && same(a.means, b.means) &&
         same(a.variances, b.variances) && same(a.pred_params, b.pred_params);
}

bool operator==(const SubgroupAssignment& a, const SubgroupAssignment& b) {
  return a.sample_ids == b.sample_ids && a.hard_labels == b.hard_labels &&
         a.n_components == b.n_components && a.gamma == b.gamma && a.seed == b.seed &&
         a.responsibilities.rows() == b.responsibilities.rows() &&
         a.responsibilities.cols() == b.responsibilities.cols() &&
         a.responsibilities == b.responsibilities;
}

void check_params(const MixtureParams& params) {
  const auto k = params.priors.size();
  if (k < 1) throw DimensionError("mixture params: no components");
  if (params.means.rows() != k || params.variances.rows() != k || params.pred_params.rows() != k) {
    throw DimensionError("mixture params: component counts disagree");
  }
  if (params.means.cols() < 1 || params.variances.cols() != params.means.cols()) {
    throw DimensionError("mixture params: mean and variance dimensions disagree");
  }
  if (params.pred_params.cols() < 2) throw DimensionError("mixture params: fewer than two classes");
  if (!std::isfinite(params.gamma) || params.gamma < 0.0) {
    throw RangeError("mixture params: gamma must be finite and non-negative");
  }
  if (!params.priors.allFinite() || !params.means.allFinite() || !params.variances.allFinite() ||
      !params.pred_params.allFinite()) {
    throw RangeError("mixture params: non-finite entry");
  }
  if ((params.priors.array() < 0.0).any() || std::abs(params.priors.sum() - 1.0) > 1e-12) {
    throw SimplexError("mixture params: priors are not a distribution");
  }
  if (params.variances.minCoeff() < kVarianceFloor) {
    throw RangeError("mixture params: variance below floor");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto theta = params.pred_params.row(j);
    if (theta.minCoeff() < kCategoricalFloor || std::abs(theta.sum() - 1.0) > 1e-12) {
      throw SimplexError("mixture params: categorical " + std::to_string(j) +
                         " off the floored simplex");
    }
  }
}

Vector project_to_floored_simplex(const Vector& weights, double floor) {
  const Eigen::Index n = weights.size();
  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  Vector theta(n);
  for (;;) {
    double free_weight = 0.0;
    Eigen::Index free_count = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!pinned[c]) {
        free_weight += weights(c);
        ++free_count;
      }
    }
    const double budget = 1.0 - floor * static_cast<double>(n - free_count);
    bool changed = false;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (pinned[c]) {
        theta(c) = floor;
        continue;
      }
      theta(c) = free_weight > 0.0 ? budget * weights(c) / free_weight
                                   : budget / static_cast<double>(free_count);
      if (theta(c) < floor) {
        pinned[c] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return theta;
}

double joint_log_density(const MixtureParams& params, std::span<const double> z,
                         std::span<const double> yhat, std::size_t component) {
  if (z.size() != params.dim() || yhat.size() != params.num_classes() ||
      component >= params.n_components()) {
    throw DimensionError("joint_log_density: argument shapes do not match params");
  }
  const auto j = static_cast<Eigen::Index>(component);
  return score(params, j, component_offset(params, j), z.data(), yhat.data());
}

EStepResult e_step(const MixtureParams& params, const Matrix& z, const Matrix& yhat) {
  check_shapes(params, z, yhat);
  const Eigen::Index n = z.rows();
  const Eigen::Index k = params.priors.size();
  Vector offsets(k);
  for (Eigen::Index j = 0; j < k; ++j) offsets(j) = component_offset(params, j);

  EStepResult result;
  result.responsibilities.resize(n, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* zi = z.data() + i * z.cols();
    const double* yi = yhat.data() + i * yhat.cols();
    double* row = result.responsibilities.data() + i * k;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      row[j] = score(params, j, offsets(j), zi, yi);
      top = std::max(top, row[j]);
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      row[j] = std::exp(row[j] - top);
      sum += row[j];
    }
    for (Eigen::Index j = 0; j < k; ++j) row[j] /= sum;
    total += top + std::log(sum);
  }
  result.log_likelihood = total;
  return result;
}

MStepResult m_step(const Matrix& responsibilities, const Matrix& z, const Matrix& yhat,
                   double gamma) {
  const Eigen::Index n = z.rows();
  const Eigen::Index k = responsibilities.cols();
  const Eigen::Index q = z.cols();
  const Eigen::Index classes = yhat.cols();
  if (responsibilities.rows() != n || yhat.rows() != n) {
    throw DimensionError("m_step: responsibilities, embeddings and predictions disagree on rows");
  }
  if (n < 1 || k < 1) throw DimensionError("m_step: empty input");

  MStepResult result;
  MixtureParams& p = result.params;
  p.gamma = gamma;
  p.priors.resize(k);
  p.means.resize(k, q);
  p.variances.resize(k, q);
  p.pred_params.resize(k, classes);

  std::optional<Pooled> pooled;
  double total_mass = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    double mass = 0.0;
    Vector mean = Vector::Zero(q);
    Vector pred = Vector::Zero(classes);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = responsibilities(i, j);
      mass += r;
      mean += r * z.row(i).transpose();
      pred += r * yhat.row(i).transpose();
    }
    if (mass > 0.0) {
      mean /= mass;
      Vector var = Vector::Zero(q);
      for (Eigen::Index i = 0; i < n; ++i) {
        var += responsibilities(i, j) * (z.row(i).transpose() - mean).array().square().matrix();
      }
      var /= mass;
      p.means.row(j) = mean.transpose();
      p.variances.row(j) = var.cwiseMax(kVarianceFloor).transpose();
      p.pred_params.row(j) = project_to_floored_simplex(pred, kCategoricalFloor).transpose();
    } else {
      if (!pooled) pooled = pooled_statistics(z, yhat);
      p.means.row(j) = pooled->mean.transpose();
      p.variances.row(j) = pooled->variance.transpose();
      p.pred_params.row(j) =
          project_to_floored_simplex(pooled->mean_prediction, kCategoricalFloor).transpose();
    }
    p.priors(j) = mass;
    total_mass += mass;
    if (mass < kEmptyComponentMass) result.empty_components.push_back(static_cast<std::size_t>(j));
  }
  p.priors /= total_mass;
  return result;
}

MixtureParams initialize_params(const Matrix& z, const Matrix& yhat, std::size_t k, double gamma,
                                std::mt19937_64& rng) {
  const Eigen::Index n = z.rows();
  if (k < 1 || static_cast<Eigen::Index>(k) > n) {
    throw InsufficientDataError("mixture: need at least " + std::to_string(k) + " samples, got " +
                                std::to_string(n));
  }
  const Pooled pooled = pooled_statistics(z, yhat);

  auto distance = [&](Eigen::Index a, Eigen::Index b) {
    double d2 = (z.row(a) - z.row(b)).squaredNorm();
    if (gamma != 0.0) d2 += gamma * (yhat.row(a) - yhat.row(b)).squaredNorm();
    return d2;
  };

  std::vector<Eigen::Index> centers;
  centers.reserve(k);
  std::uniform_int_distribution<Eigen::Index> pick_any(0, n - 1);
  centers.push_back(pick_any(rng));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    const Eigen::Index last = centers.back();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], distance(i, last));
      total += nearest[i];
    }
    Eigen::Index chosen = -1;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        running += nearest[i];
        chosen = i;
        if (running > target) break;
      }
    } else {
      chosen = pick_any(rng);
    }
    centers.push_back(chosen);
  }

  MixtureParams params;
  const auto kk = static_cast<Eigen::Index>(k);
  params.gamma = gamma;
  params.priors = Vector::Constant(kk, 1.0 / static_cast<double>(k));
  params.means.resize(kk, z.cols());
  params.variances.resize(kk, z.cols());
  params.pred_params.resize(kk, yhat.cols());
  for (Eigen::Index j = 0; j < kk; ++j) {
    params.means.row(j) = z.row(centers[j]);
    params.variances.row(j) = pooled.variance.transpose();
    const Vector blend = 0.5 * pooled.mean_prediction + 0.5 * yhat.row(centers[j]).transpose();
    params.pred_params.row(j) = project_to_floored_simplex(blend, kCategoricalFloor).transpose();
  }
  return params;
}

EmRun run_em(const Matrix& z, const Matrix& yhat, MixtureParams init, const FitConfig& config) {
  check_params(init);
  check_shapes(init, z, yhat);
  if (z.rows() < 1) throw InsufficientDataError("mixture: no samples");

  EmRun run;
  run.params = std::move(init);
  EStepResult current = e_step(run.params, z, yhat);
  run.trace.log_likelihoods.push_back(current.log_likelihood);
  std::optional<Pooled> pooled;

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    MStepResult step = m_step(current.responsibilities, z, yhat, run.params.gamma);
    EStepResult next = e_step(step.params, z, yhat);

    // Re-seed starved components, keeping a rescue only if it does not lower
    // the log-likelihood.
    for (const std::size_t j : step.empty_components) {
      if (run.trace.rescue_attempts >= config.max_rescues) break;
      ++run.trace.rescue_attempts;
      if (!pooled) pooled = pooled_statistics(z, yhat);
      const auto sample = static_cast<Eigen::Index>(least_explained_sample(next.responsibilities));
      const auto jj = static_cast<Eigen::Index>(j);
      MixtureParams candidate = step.params;
      const double share = 1.0 / static_cast<double>(z.rows());
      candidate.priors *= (1.0 - share) / (candidate.priors.sum() - candidate.priors(jj));
      candidate.priors(jj) = share;
      candidate.priors /= candidate.priors.sum();
      candidate.means.row(jj) = z.row(sample);
      candidate.variances.row(jj) = pooled->variance.transpose();
      const Vector blend = 0.5 * pooled->mean_prediction + 0.5 * yhat.row(sample).transpose();
      candidate.pred_params.row(jj) =
          project_to_floored_simplex(blend, kCategoricalFloor).transpose();
      EStepResult trial = e_step(candidate, z, yhat);
      if (trial.log_likelihood >= next.log_likelihood) {
        step.params = std::move(candidate);
        next = std::move(trial);
        ++run.trace.rescues_accepted;
      }
    }

    const double improvement = next.log_likelihood - current.log_likelihood;
    const double scale = std::max(std::abs(current.log_likelihood),
                                  std::numeric_limits<double>::min());
    run.params = std::move(step.params);
    current = std::move(next);
    run.trace.log_likelihoods.push_back(current.log_likelihood);
    ++run.trace.iterations;
    if (improvement / scale < config.tolerance) {
      run.trace.converged = true;
      break;
    }
  }
  return run;
}

SubgroupModel fit(const EmbeddingMatrix& z_val, const PredictionMatrix& yhat_val, std::size_t k,
                  double gamma, const FitConfig& config, std::uint64_t seed,
                  std::vector<EmTrace>* traces) {
  const std::size_t n = z_val.rows();
  if (yhat_val.rows() != n) throw AlignmentError("fit: embeddings and predictions differ in length");
  check_aligned(z_val.sample_ids, yhat_val.sample_ids, "fit predictions");
  if (k < 1 || n < k) {
    throw InsufficientDataError("fit: need n >= k >= 1, got n=" + std::to_string(n) +
                                " k=" + std::to_string(k));
  }
  if (!std::isfinite(gamma) || gamma < 0.0) throw RangeError("fit: gamma must be >= 0");
  if (config.restarts < 1) throw RangeError("fit: need at least one restart");

  SubgroupModel model;
  model.seed = seed;
  model.pca = fit_pca(z_val, clamp_pca_dim(config.pca_dim, n, z_val.cols()));
  const Matrix z = pca_transform(model.pca, z_val).data;

  std::vector<EmRun> runs(config.restarts);
  parallel_for(config.restarts, config.threads, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    runs[r] = run_em(z, yhat_val.probs, initialize_params(z, yhat_val.probs, k, gamma, rng), config);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].trace.log_likelihoods.back() > runs[best].trace.log_likelihoods.back()) best = r;
  }
  model.params = runs[best].params;
  model.diagnostics.log_likelihood = runs[best].trace.log_likelihoods.back();
  model.diagnostics.iterations = runs[best].trace.iterations;
  model.diagnostics.restart = best;
  model.diagnostics.converged = runs[best].trace.converged;
  if (traces) {
    traces->clear();
    for (auto& run : runs) traces->push_back(std::move(run.trace));
  }
  return model;
}

std::vector<std::size_t> hard_labels_from(const Matrix& responsibilities) {
  std::vector<std::size_t> labels(static_cast<std::size_t>(responsibilities.rows()));
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    labels[i] = argmax(row_span(responsibilities, i));
  }
  return labels;
}

SubgroupAssignment assign(const SubgroupModel& model, const EmbeddingMatrix& z_test_raw,
                          const PredictionMatrix& yhat_test) {
  if (z_test_raw.cols() != model.pca.input_dim() && z_test_raw.rows() > 0) {
    throw DimensionError("assign: embeddings have " + std::to_string(z_test_raw.cols()) +
                         " columns, model expects " + std::to_string(model.pca.input_dim()));
  }
  if (yhat_test.rows() != z_test_raw.rows()) {
    throw AlignmentError("assign: embeddings and predictions differ in length");
  }
  check_aligned(z_test_raw.sample_ids, yhat_test.sample_ids, "assign predictions");

  SubgroupAssignment out;
  out.sample_ids = z_test_raw.sample_ids;
  out.n_components = model.params.n_components();
  out.gamma = model.params.gamma;
  out.seed = model.seed;
  if (z_test_raw.rows() == 0) {
    out.responsibilities.resize(0, static_cast<Eigen::Index>(out.n_components));
    return out;
  }
  const Matrix z = pca_transform(model.pca, z_test_raw).data;
  EStepResult e = e_step(model.params, z, yhat_test.probs);
  out.hard_labels = hard_labels_from(e.responsibilities);
  out.responsibilities = std::move(e.responsibilities);
  return out;
}

}  // namespace hstrat
