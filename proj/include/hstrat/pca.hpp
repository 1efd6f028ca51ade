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

#include "hstrat/datamodel.hpp"

namespace hstrat {

// Linear projection onto the leading principal axes of a fitted sample.
//
// `components` holds one unit-norm axis per row (q x d), ordered by
// descending explained variance. Each axis is sign-normalized so that its
// entry of largest magnitude is positive, lowest index winning ties.
struct PcaModel {
  Vector mean;
  Matrix components;
  Vector explained_variance;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(components.rows()); }

  friend bool operator==(const PcaModel& a, const PcaModel& b);
};

inline constexpr std::size_t kDefaultPcaDim = 128;

// min(requested, n - 1, d), never below 1.
std::size_t clamp_pca_dim(std::size_t requested, std::size_t n_samples, std::size_t dim);

// Top-q eigenvectors of the unbiased sample covariance. Uses the n x n Gram
// matrix instead of the d x d covariance when n < d.
PcaModel fit_pca(const EmbeddingMatrix& x, std::size_t q);

// (x - mean) projected onto the components; sample ids carry over.
EmbeddingMatrix pca_transform(const PcaModel& model, const EmbeddingMatrix& x);

// Structural checks used by loaders: shapes agree, variances sorted and
// non-negative, components orthonormal within `tolerance`.
void check_pca_model(const PcaModel& model, double tolerance = 1e-8);

}  // namespace hstrat
