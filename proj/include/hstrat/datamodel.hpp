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

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hstrat {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using SampleIds = std::vector<std::string>;

// One row per sample in an unconstrained feature space.
struct EmbeddingMatrix {
  SampleIds sample_ids;
  Matrix data;

  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data.cols()); }

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b);
};

// Softmax outputs of the audited classifier; one probability row per sample.
struct PredictionMatrix {
  SampleIds sample_ids;
  Matrix probs;

  std::size_t rows() const { return static_cast<std::size_t>(probs.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(probs.cols()); }

  friend bool operator==(const PredictionMatrix& a, const PredictionMatrix& b);
};

// Ground-truth class indices. Only metrics and the synthetic generator read
// these; the mixture never does.
struct LabelVector {
  SampleIds sample_ids;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

// Categorical attributes, stored column-wise. std::nullopt marks a missing cell.
struct MetadataTable {
  using Column = std::vector<std::optional<std::string>>;

  SampleIds sample_ids;
  std::vector<std::string> attribute_names;
  std::vector<Column> columns;

  std::size_t rows() const { return sample_ids.size(); }
  // Index of `name` in attribute_names, or std::nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  // Throws UnknownAttributeError when absent.
  const Column& column(std::string_view name) const;

  friend bool operator==(const MetadataTable&, const MetadataTable&) = default;
};

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct DatasetBundle {
  EmbeddingMatrix embeddings;
  PredictionMatrix predictions;
  std::optional<LabelVector> labels;
  std::optional<MetadataTable> metadata;
  Split split = Split::kTest;

  std::size_t size() const { return embeddings.rows(); }

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

// A DatasetBundle that passed validate_bundle. Only validate_bundle builds one.
class ValidatedBundle {
 public:
  const DatasetBundle& bundle() const { return bundle_; }
  const DatasetBundle* operator->() const { return &bundle_; }

  friend bool operator==(const ValidatedBundle&, const ValidatedBundle&) = default;

 private:
  friend ValidatedBundle validate_bundle(DatasetBundle bundle);
  explicit ValidatedBundle(DatasetBundle bundle) : bundle_(std::move(bundle)) {}

  DatasetBundle bundle_;
};

// Largest row-sum deviation that is silently repaired by renormalization.
inline constexpr double kSimplexTolerance = 1e-4;

// Checks every type invariant plus cross-member id alignment and returns the
// bundle with prediction rows renormalized to sum to one.
ValidatedBundle validate_bundle(DatasetBundle bundle);

// Per-member checks, usable on their own. The prediction check renormalizes
// rows in place.
void check_sample_ids(const SampleIds& ids, std::string_view what);
void check_embeddings(const EmbeddingMatrix& embeddings);
void check_predictions(PredictionMatrix& predictions);
void check_labels(const LabelVector& labels, std::size_t num_classes);
void check_metadata(const MetadataTable& metadata);
void check_aligned(const SampleIds& expected, const SampleIds& actual, std::string_view what);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

// Contiguous view of one row of a row-major matrix.
inline std::span<const double> row_span(const Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace hstrat
