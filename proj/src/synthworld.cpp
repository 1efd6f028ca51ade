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

#include "hstrat/synthworld.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "hstrat/errors.hpp"
#include "hstrat/metrics.hpp"

namespace hstrat {
namespace {

constexpr double kTetrahedron[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
constexpr double kPickedMass = 0.9;

SynthSplit generate_split(const SynthSpec& spec, Split which, std::size_t n, double p) {
  const auto tag = static_cast<std::uint32_t>(which);
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    tag};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution positive(spec.positive_fraction);
  const double scale = spec.separation / (2.0 * std::sqrt(2.0));
  const std::string prefix(to_string(which));

  SynthSplit out;
  DatasetBundle& b = out.bundle;
  b.split = which;
  const auto rows = static_cast<Eigen::Index>(n);
  b.embeddings.data.resize(rows, static_cast<Eigen::Index>(spec.dim));
  b.predictions.probs.resize(rows, 2);
  LabelVector labels;
  MetadataTable metadata;
  metadata.attribute_names = {std::string(kKnownArtifact)};
  metadata.columns.resize(1);

  for (std::size_t i = 0; i < n; ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "%s_%06zu", prefix.c_str(), i);
    const int y = positive(rng) ? 1 : 0;
    const double rate = y == 1 ? p : 1.0 - p;
    const int known = std::bernoulli_distribution(rate)(rng) ? 1 : 0;
    const int hidden = std::bernoulli_distribution(rate)(rng) ? 1 : 0;
    const int g = 2 * known + hidden;

    auto row = b.embeddings.data.row(static_cast<Eigen::Index>(i));
    for (std::size_t d = 0; d < spec.dim; ++d) {
      const double centre = d < 3 ? scale * kTetrahedron[g][d] : 0.0;
      row(static_cast<Eigen::Index>(d)) = centre + noise(rng);
    }
    const bool hit = std::bernoulli_distribution(spec.accuracy_targets[g])(rng);
    const int picked = hit ? y : 1 - y;
    b.predictions.probs(static_cast<Eigen::Index>(i), picked) = kPickedMass;
    b.predictions.probs(static_cast<Eigen::Index>(i), 1 - picked) = 1.0 - kPickedMass;

    b.embeddings.sample_ids.emplace_back(id);
    labels.labels.push_back(y);
    metadata.columns[0].emplace_back(std::to_string(known));
    out.truth.known.push_back(known);
    out.truth.hidden.push_back(hidden);
    out.truth.subgroup.push_back(g);
  }
  b.predictions.sample_ids = b.embeddings.sample_ids;
  labels.sample_ids = b.embeddings.sample_ids;
  metadata.sample_ids = b.embeddings.sample_ids;
  out.truth.sample_ids = b.embeddings.sample_ids;
  b.labels = std::move(labels);
  b.metadata = std::move(metadata);
  return out;
}

}  // namespace

MetadataTable HiddenTruth::as_metadata() const {
  MetadataTable table;
  table.sample_ids = sample_ids;
  table.attribute_names = {std::string(kKnownArtifact), std::string(kHiddenArtifact),
                           std::string(kTruthSubgroup)};
  table.columns.resize(3);
  for (std::size_t i = 0; i < size(); ++i) {
    table.columns[0].emplace_back(std::to_string(known[i]));
    table.columns[1].emplace_back(std::to_string(hidden[i]));
    table.columns[2].emplace_back(std::to_string(subgroup[i]));
  }
  return table;
}

const SynthSplit& SynthWorld::split(Split which) const {
  switch (which) {
    case Split::kTrain:
      return train;
    case Split::kValidation:
      return validation;
    case Split::kTest:
      return test;
  }
  return test;
}

void check_spec(const SynthSpec& spec) {
  if (!(spec.p >= 0.5 && spec.p < 1.0)) throw SpecError("synth: bias level p must lie in [0.5, 1)");
  if (!(spec.separation > 0.0) || !std::isfinite(spec.separation)) {
    throw SpecError("synth: separation must be positive");
  }
  if (spec.dim < 3) throw SpecError("synth: embedding dimension must be at least 3");
  if (spec.n_train < 1 || spec.n_val < 1 || spec.n_test < 1) {
    throw SpecError("synth: every split needs at least one sample");
  }
  for (const double t : spec.accuracy_targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw SpecError("synth: accuracy targets must lie in [0, 1]");
  }
  if (!(spec.positive_fraction >= 0.0 && spec.positive_fraction <= 1.0)) {
    throw SpecError("synth: positive fraction must lie in [0, 1]");
  }
}

SynthWorld generate_world(const SynthSpec& spec) {
  check_spec(spec);
  SynthWorld world;
  world.spec = spec;
  world.train = generate_split(spec, Split::kTrain, spec.n_train, spec.p);
  world.validation = generate_split(spec, Split::kValidation, spec.n_val, spec.p);
  world.test = generate_split(spec, Split::kTest, spec.n_test, 0.5);
  return world;
}

OracleGap oracle_gap(const SynthSplit& split) {
  const auto& b = split.bundle;
  const std::vector<int> correct = correctness(*b.labels, b.predictions);
  std::vector<std::size_t> four(split.truth.size());
  std::vector<std::size_t> two(split.truth.size());
  for (std::size_t i = 0; i < four.size(); ++i) {
    four[i] = static_cast<std::size_t>(split.truth.subgroup[i]);
    two[i] = static_cast<std::size_t>(split.truth.known[i]);
  }
  OracleGap gap;
  gap.true_gap = performance_gap(division_performance(four, correct, {}, Metric::kAccuracy, 1));
  gap.known_only_gap = performance_gap(division_performance(two, correct, {}, Metric::kAccuracy, 1));
  return gap;
}

OracleGap oracle_gap(const SynthWorld& world, Split split) { return oracle_gap(world.split(split)); }

}  // namespace hstrat
