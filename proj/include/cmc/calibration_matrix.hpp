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

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmc/bits.hpp"

namespace cmc {

using Matrix = Eigen::MatrixXd;

inline constexpr std::size_t kMaxPatchQubits = 4;

/// Raised when a local factor cannot be inverted or raised to a power.
class SingularFactorError : public std::runtime_error {
 public:
  SingularFactorError(const std::string& what, std::vector<Qubit> support)
      : std::runtime_error(what), support_(std::move(support)) {}
  const std::vector<Qubit>& support() const { return support_; }

 private:
  std::vector<Qubit> support_;
};

/// Column-stochastic map from prepared basis states (columns) to observed
/// outcomes (rows) on a small ascending qubit support.
class CalibrationMatrix {
 public:
  static constexpr double kColumnTolerance = 1e-9;

  CalibrationMatrix(std::vector<Qubit> support, Matrix entries);

  static CalibrationMatrix identity(std::vector<Qubit> support);

  const std::vector<Qubit>& support() const { return support_; }
  const Matrix& entries() const { return entries_; }
  std::size_t num_qubits() const { return support_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }

 private:
  std::vector<Qubit> support_;
  Matrix entries_;
};

// Throws unless support is non-empty, strictly ascending and at most
// kMaxPatchQubits long.
void validate_support(std::span<const Qubit> support);

Matrix kron(const Matrix& a, const Matrix& b);

/// I (x) ... (x) m (x) ... (x) I with `m` at `position` of a `width`-qubit
/// operator (position 0 is the most significant factor).
Matrix embed_single(const Matrix& m, std::size_t position, std::size_t width);

/// Divides each column by its sum (the |.| convention). Zero columns are left
/// untouched.
Matrix normalize_columns(const Matrix& m);

/// Largest absolute deviation of a column sum from one.
double column_sum_error(const Matrix& m);

/// Reduces a calibration on `support` to the qubits in `keep`: the discarded
/// qubits are prepared in |0> and their outcomes summed out, and the result is
/// column-normalised.
Matrix normalized_partial_trace(const Matrix& m, std::span<const Qubit> support,
                                std::span<const Qubit> keep);
CalibrationMatrix normalized_partial_trace(const CalibrationMatrix& c,
                                           std::span<const Qubit> keep);

/// Principal real power of a matrix with real positive spectrum. Matrices with
/// complex or non-positive eigenvalues are regularised by mixing towards the
/// identity (epsilon doubling from 1e-6 up to 1e-2) before giving up.
Matrix fractional_power(const Matrix& m, double exponent);

/// Exact small inverse. A ridge of 1e-8 is tried before reporting failure.
Matrix invert_factor(const Matrix& m, std::span<const Qubit> support);

}  // namespace cmc
