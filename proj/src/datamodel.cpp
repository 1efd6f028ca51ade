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

#include "hstrat/datamodel.hpp"

#include <cmath>
#include <unordered_set>

#include "hstrat/errors.hpp"

namespace hstrat {

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return a.sample_ids == b.sample_ids && a.data.rows() == b.data.rows() &&
         a.data.cols() == b.data.cols() && a.data == b.data;
}

bool operator==(const PredictionMatrix& a, const PredictionMatrix& b) {
  return a.sample_ids == b.sample_ids && a.probs.rows() == b.probs.rows() &&
         a.probs.cols() == b.probs.cols() && a.probs == b.probs;
}

std::optional<std::size_t> MetadataTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    if (attribute_names[i] == name) return i;
  }
  return std::nullopt;
}

const MetadataTable::Column& MetadataTable::column(std::string_view name) const {
  const auto index = find(name);
  if (!index) throw UnknownAttributeError("unknown metadata attribute '" + std::string(name) + "'");
  return columns[*index];
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void check_sample_ids(const SampleIds& ids, std::string_view what) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (id.empty()) throw RangeError(std::string(what) + ": empty sample id");
    if (!seen.insert(id).second) {
      throw AlignmentError(std::string(what) + ": duplicate sample id '" + id + "'");
    }
  }
}

void check_aligned(const SampleIds& expected, const SampleIds& actual, std::string_view what) {
  if (expected.size() != actual.size()) {
    throw AlignmentError(std::string(what) + ": " + std::to_string(actual.size()) +
                         " samples, expected " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) {
      throw AlignmentError(std::string(what) + ": sample id '" + actual[i] + "' at row " +
                           std::to_string(i) + ", expected '" + expected[i] + "'");
    }
  }
}

void check_embeddings(const EmbeddingMatrix& embeddings) {
  if (embeddings.rows() < 1 || embeddings.cols() < 1) {
    throw RangeError("embeddings: need at least one row and one column");
  }
  if (embeddings.sample_ids.size() != embeddings.rows()) {
    throw AlignmentError("embeddings: sample id count does not match row count");
  }
  check_sample_ids(embeddings.sample_ids, "embeddings");
  if (!embeddings.data.allFinite()) throw RangeError("embeddings: non-finite entry");
}

void check_predictions(PredictionMatrix& predictions) {
  if (predictions.num_classes() < 2) throw RangeError("predictions: need at least two classes");
  if (predictions.sample_ids.size() != predictions.rows()) {
    throw AlignmentError("predictions: sample id count does not match row count");
  }
  check_sample_ids(predictions.sample_ids, "predictions");
  for (Eigen::Index i = 0; i < predictions.probs.rows(); ++i) {
    auto row = predictions.probs.row(i);
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      const double v = row(c);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw RangeError("predictions: entry out of [0,1] at row " + std::to_string(i));
      }
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw SimplexError("predictions: row " + std::to_string(i) + " sums to " +
                         std::to_string(sum));
    }
    // Rows already on the simplex up to rounding are left untouched so that
    // validation is idempotent.
    if (std::abs(sum - 1.0) > 1e-12) row /= sum;
  }
}

void check_labels(const LabelVector& labels, std::size_t num_classes) {
  if (labels.sample_ids.size() != labels.labels.size()) {
    throw AlignmentError("labels: sample id count does not match label count");
  }
  check_sample_ids(labels.sample_ids, "labels");
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const int y = labels.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw RangeError("labels: class index " + std::to_string(y) + " out of range at row " +
                       std::to_string(i));
    }
  }
}

void check_metadata(const MetadataTable& metadata) {
  check_sample_ids(metadata.sample_ids, "metadata");
  if (metadata.attribute_names.size() != metadata.columns.size()) {
    throw AlignmentError("metadata: attribute name count does not match column count");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& name : metadata.attribute_names) {
    if (name.empty()) throw RangeError("metadata: empty attribute name");
    if (!names.insert(name).second) {
      throw RangeError("metadata: duplicate attribute '" + name + "'");
    }
  }
  for (std::size_t c = 0; c < metadata.columns.size(); ++c) {
    if (metadata.columns[c].size() != metadata.rows()) {
      throw AlignmentError("metadata: column '" + metadata.attribute_names[c] +
                           "' length does not match sample count");
    }
  }
}

ValidatedBundle validate_bundle(DatasetBundle bundle) {
  check_embeddings(bundle.embeddings);
  check_predictions(bundle.predictions);
  const SampleIds& ids = bundle.embeddings.sample_ids;
  check_aligned(ids, bundle.predictions.sample_ids, "predictions");
  if (bundle.labels) {
    check_labels(*bundle.labels, bundle.predictions.num_classes());
    check_aligned(ids, bundle.labels->sample_ids, "labels");
  }
  if (bundle.metadata) {
    check_metadata(*bundle.metadata);
    check_aligned(ids, bundle.metadata->sample_ids, "metadata");
  }
  return ValidatedBundle(std::move(bundle));
}

}  // namespace hstrat
