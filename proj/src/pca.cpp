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

#include "hstrat/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hstrat/errors.hpp"

namespace hstrat {
namespace {

void normalize_sign(Eigen::Ref<Vector> axis) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < axis.size(); ++i) {
    if (std::abs(axis(i)) > std::abs(axis(best)) + 1e-12) best = i;
  }
  if (axis(best) < 0.0) axis = -axis;
}

// Modified Gram-Schmidt on the columns of `basis`. A column that collapses
// (rank-deficient input) is replaced by the first standard basis vector that
// is not already spanned.
void orthonormalize_columns(Matrix& basis) {
  const Eigen::Index d = basis.rows();
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Vector v = basis.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    double norm = v.norm();
    for (Eigen::Index e = 0; norm < 1e-10 && e < d; ++e) {
      v = Vector::Unit(d, e);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index k = 0; k < j; ++k) v -= basis.col(k).dot(v) * basis.col(k);
      }
      norm = v.norm();
    }
    basis.col(j) = v / norm;
  }
}

}  // namespace

bool operator==(const PcaModel& a, const PcaModel& b) {
  return a.mean.size() == b.mean.size() && a.mean == b.mean &&
         a.components.rows() == b.components.rows() &&
         a.components.cols() == b.components.cols() && a.components == b.components &&
         a.explained_variance.size() == b.explained_variance.size() &&
         a.explained_variance == b.explained_variance;
}

std::size_t clamp_pca_dim(std::size_t requested, std::size_t n_samples, std::size_t dim) {
  std::size_t q = std::min(requested, dim);
  if (n_samples >= 1) q = std::min(q, n_samples - 1);
  return std::max<std::size_t>(q, 1);
}

PcaModel fit_pca(const EmbeddingMatrix& x, std::size_t q) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  if (n < 2) throw DegenerateError("pca: need at least two samples");
  if (q < 1 || q > static_cast<std::size_t>(std::min(n - 1, d))) {
    throw DimensionError("pca: retained dimension " + std::to_string(q) + " outside [1, " +
                         std::to_string(std::min(n - 1, d)) + "]");
  }
  const auto qi = static_cast<Eigen::Index>(q);

  PcaModel model;
  model.mean = x.data.colwise().mean().transpose();
  const Matrix centered = x.data.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Matrix axes(d, qi);  // column layout while building
  Vector variance(qi);
  if (n >= d) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DegenerateError("pca: eigensolver failed");
    for (Eigen::Index k = 0; k < qi; ++k) {
      variance(k) = solver.eigenvalues()(d - 1 - k);
      axes.col(k) = solver.eigenvectors().col(d - 1 - k);
    }
  } else {
    const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw DegenerateError("pca: eigensolver failed");
    const double largest = std::max(solver.eigenvalues()(n - 1), 0.0);
    for (Eigen::Index k = 0; k < qi; ++k) {
      const double lambda = solver.eigenvalues()(n - 1 - k);
      variance(k) = lambda;
      if (lambda > 1e-12 * std::max(largest, 1.0)) {
        axes.col(k) = centered.transpose() * solver.eigenvectors().col(n - 1 - k) /
                      std::sqrt(denom * lambda);
      } else {
        axes.col(k).setZero();
      }
    }
    orthonormalize_columns(axes);
  }

  model.explained_variance = variance.cwiseMax(0.0);
  model.components.resize(qi, d);
  for (Eigen::Index k = 0; k < qi; ++k) {
    Vector axis = axes.col(k);
    normalize_sign(axis);
    model.components.row(k) = axis.transpose();
  }
  return model;
}

EmbeddingMatrix pca_transform(const PcaModel& model, const EmbeddingMatrix& x) {
  if (x.cols() != model.input_dim()) {
    throw DimensionError("pca: input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
  }
  EmbeddingMatrix out;
  out.sample_ids = x.sample_ids;
  out.data = (x.data.rowwise() - model.mean.transpose()) * model.components.transpose();
  return out;
}

void check_pca_model(const PcaModel& model, double tolerance) {
  const auto d = model.mean.size();
  const auto q = model.components.rows();
  if (d < 1 || q < 1) throw DimensionError("pca model: empty");
  if (model.components.cols() != d || model.explained_variance.size() != q) {
    throw DimensionError("pca model: inconsistent shapes");
  }
  if (!model.mean.allFinite() || !model.components.allFinite() ||
      !model.explained_variance.allFinite()) {
    throw RangeError("pca model: non-finite entry");
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    if (model.explained_variance(k) < 0.0) throw RangeError("pca model: negative variance");
    if (k > 0 && model.explained_variance(k) > model.explained_variance(k - 1)) {
      throw RangeError("pca model: explained variance not sorted");
    }
  }
  const Eigen::MatrixXd gram = model.components * model.components.transpose();
  if ((gram - Eigen::MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff() > tolerance) {
    throw RangeError("pca model: components are not orthonormal");
  }
}

}  // namespace hstrat
