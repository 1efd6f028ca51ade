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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hstrat/datamodel.hpp"

namespace hstrat {

// Column names used for the simulated artifacts.
inline constexpr std::string_view kKnownArtifact = "artifact_known";
inline constexpr std::string_view kHiddenArtifact = "artifact_hidden";
inline constexpr std::string_view kTruthSubgroup = "subgroup";

inline constexpr std::array<double, 3> kBiasLevels = {0.6, 0.7, 0.8};

// Parameters of a simulated audit scenario with two binary artifacts that
// are spuriously correlated with a binary label.
struct SynthSpec {
  double p = 0.8;  // bias level for train and validation; test always uses 0.5
  std::size_t n_train = 10000;
  std::size_t n_val = 4000;
  std::size_t n_test = 4000;
  std::size_t dim = 32;
  double separation = 8.0;  // centroid distance in units of the noise std
  // Expected accuracy of the classifier in ground-truth subgroups
  // 2 * known + hidden = 0, 1, 2, 3.
  std::array<double, 4> accuracy_targets = {0.95, 0.9, 0.7, 0.5};
  double positive_fraction = 0.5;
  std::uint64_t seed = 0;
};

// Per-sample ground truth that is never shown to the mixture.
struct HiddenTruth {
  SampleIds sample_ids;
  std::vector<int> known;
  std::vector<int> hidden;
  std::vector<int> subgroup;  // 2 * known + hidden

  std::size_t size() const { return sample_ids.size(); }
  // Both artifact flags and the subgroup id as categorical columns "0"/"1"...
  MetadataTable as_metadata() const;

  friend bool operator==(const HiddenTruth&, const HiddenTruth&) = default;
};

struct SynthSplit {
  DatasetBundle bundle;  // labels and the known-artifact metadata column
  HiddenTruth truth;
};

struct SynthWorld {
  SynthSpec spec;
  SynthSplit train;
  SynthSplit validation;
  SynthSplit test;

  const SynthSplit& split(Split which) const;
};

void check_spec(const SynthSpec& spec);

// Draws the three splits. Each sample gets a label, then each artifact
// independently with probability p on positives and 1 - p on negatives.
// Embeddings are the subgroup centroid (a regular tetrahedron with edge
// `separation` in the first three dimensions) plus unit Gaussian noise.
// Predictions pick the true class with the subgroup's target accuracy and put
// 0.9 on the picked class.
SynthWorld generate_world(const SynthSpec& spec);

struct OracleGap {
  double true_gap = 0.0;        // over the four ground-truth subgroups
  double known_only_gap = 0.0;  // over the two groups of the known artifact
};

OracleGap oracle_gap(const SynthWorld& world, Split split);
OracleGap oracle_gap(const SynthSplit& split);

}  // namespace hstrat
