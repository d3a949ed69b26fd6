// Copyright 2026 The CMC Authors
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

#include "cmc/calibration_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace cmc {

void validate_support(std::span<const Qubit> support) {
  if (support.empty()) throw std::invalid_argument("empty qubit support");
  if (support.size() > kMaxPatchQubits) {
    throw std::invalid_argument("support larger than " + std::to_string(kMaxPatchQubits) +
                                " qubits");
  }
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i] <= support[i - 1]) {
      throw std::invalid_argument("support must be strictly ascending");
    }
  }
}

CalibrationMatrix::CalibrationMatrix(std::vector<Qubit> support, Matrix entries)
    : support_(std::move(support)), entries_(std::move(entries)) {
  validate_support(support_);
  const Eigen::Index dim = Eigen::Index{1} << support_.size();
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw std::invalid_argument("calibration matrix dimension does not match its support");
  }
  if ((entries_.array() < 0.0).any()) {
    throw std::invalid_argument("calibration matrix has negative entries");
  }
  if (column_sum_error(entries_) > kColumnTolerance) {
    throw std::invalid_argument("calibration matrix is not column-stochastic");
  }
}

CalibrationMatrix CalibrationMatrix::identity(std::vector<Qubit> support) {
  const Eigen::Index dim = Eigen::Index{1} << support.size();
  return CalibrationMatrix(std::move(support), Matrix::Identity(dim, dim));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix embed_single(const Matrix& m, std::size_t position, std::size_t width) {
  if (position >= width) throw std::out_of_range("embedding position outside operator");
  const Eigen::Index left = Eigen::Index{1} << position;
  const Eigen::Index right = Eigen::Index{1} << (width - 1 - position);
  return kron(kron(Matrix::Identity(left, left), m), Matrix::Identity(right, right));
}

Matrix normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double sum = out.col(c).sum();
    if (sum != 0.0) out.col(c) /= sum;
  }
  return out;
}

double column_sum_error(const Matrix& m) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    worst = std::max(worst, std::abs(m.col(c).sum() - 1.0));
  }
  return worst;
}

Matrix normalized_partial_trace(const Matrix& m, std::span<const Qubit> support,
                                std::span<const Qubit> keep) {
  validate_support(support);
  const std::size_t p = support.size();
  if (m.rows() != (Eigen::Index{1} << p) || m.cols() != m.rows()) {
    throw std::invalid_argument("matrix dimension does not match its support");
  }
  if (keep.empty() || keep.size() >= p) {
    throw std::invalid_argument("kept qubits must be a non-empty proper subset of the support");
  }
  // Positions (within the support) of the kept qubits, preserving ascending
  // order of `keep`.
  std::vector<std::size_t> kept_pos;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw std::invalid_argument("kept qubits must be strictly ascending");
    }
    auto it = std::find(support.begin(), support.end(), keep[i]);
    if (it == support.end()) throw std::invalid_argument("kept qubit not in support");
    kept_pos.push_back(static_cast<std::size_t>(it - support.begin()));
  }
  const std::size_t kp = keep.size();
  auto local_of = [&](std::size_t full) {
    std::size_t local = 0;
    for (std::size_t pos : kept_pos) local = (local << 1) | ((full >> (p - 1 - pos)) & 1U);
    return local;
  };
  // Column inputs: discarded qubits prepared in |0>, so only full column
  // indices whose discarded bits are zero contribute.
  std::size_t kept_bits = 0;
  for (std::size_t pos : kept_pos) kept_bits |= std::size_t{1} << (p - 1 - pos);

  Matrix out = Matrix::Zero(Eigen::Index{1} << kp, Eigen::Index{1} << kp);
  const std::size_t dim = std::size_t{1} << p;
  for (std::size_t col = 0; col < dim; ++col) {
    if ((col & ~kept_bits) != 0) continue;
    const std::size_t out_col = local_of(col);
    for (std::size_t row = 0; row < dim; ++row) {
      out(static_cast<Eigen::Index>(local_of(row)), static_cast<Eigen::Index>(out_col)) +=
          m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
  }
  return normalize_columns(out);
}

CalibrationMatrix normalized_partial_trace(const CalibrationMatrix& c,
                                           std::span<const Qubit> keep) {
  Matrix reduced = normalized_partial_trace(c.entries(), c.support(), keep);
  return CalibrationMatrix(std::vector<Qubit>(keep.begin(), keep.end()), std::move(reduced));
}

namespace {

bool try_power(const Matrix& m, double exponent, Matrix& out) {
  Eigen::EigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) return false;
  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i).imag()) > 1e-12 || values(i).real() <= 1e-12) return false;
  }
  const Matrix v = vectors.real();
  Eigen::FullPivLU<Matrix> lu(v);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) return false;
  Eigen::VectorXd powered(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    powered(i) = std::pow(values(i).real(), exponent);
  }
  out = v * powered.asDiagonal() * lu.inverse();
  return out.allFinite();
}

}  // namespace

Matrix fractional_power(const Matrix& m, double exponent) {
  if (m.rows() != m.cols()) throw std::invalid_argument("fractional power of non-square matrix");
  if (exponent < 0.0 || exponent > 1.0) {
    throw std::invalid_argument("fractional power exponent must lie in [0, 1]");
  }
  if (exponent == 0.0) return Matrix::Identity(m.rows(), m.cols());
  if (exponent == 1.0) return m;
  Matrix out;
  if (try_power(m, exponent, out)) return out;
  const Matrix id = Matrix::Identity(m.rows(), m.cols());
  for (double eps = 1e-6; eps <= 1e-2 * (1.0 + 1e-9); eps *= 2.0) {
    if (try_power((1.0 - eps) * m + eps * id, exponent, out)) return out;
  }
  throw SingularFactorError(
      "matrix has no real principal power (complex or non-positive spectrum)", {});
}

Matrix invert_factor(const Matrix& m, std::span<const Qubit> support) {
  const std::vector<Qubit> where(support.begin(), support.end());
  Eigen::FullPivLU<Matrix> lu(m);
  if (std::abs(lu.determinant()) > 1e-12) return lu.inverse();
  const Matrix ridged = m + 1e-8 * Matrix::Identity(m.rows(), m.cols());
  Eigen::FullPivLU<Matrix> retry(ridged);
  if (std::abs(retry.determinant()) > 1e-12) return retry.inverse();
  throw SingularFactorError("singular calibration factor", where);
}

}  // namespace cmc
