// Copyright 2026 The decohere Authors
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

// Finite-dimensional complex linear algebra shared by every other module.
// Vectors and matrices are plain Eigen dense types; the domain-specific
// pieces here are the tolerance policy, the validated Projector, and the
// orthonormalization used to build random frames.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace decohere {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Zero thresholds used by every decision in the library. `eps_zero` decides
/// whether a residual or overlap counts as zero; `eps_prob` is the slack
/// allowed on probabilities (slightly negative values, excluded branches).
struct Tolerance {
  double eps_zero = 1e-10;
  double eps_prob = 1e-12;

  /// Throws InvalidArgument unless 0 < eps_prob <= eps_zero.
  void validate() const;
};

/// Builds a scalar, rejecting NaN and infinity.
Complex make_scalar(double re, double im);

/// Hermitian idempotent matrix with a cached integer rank.
class Projector {
 public:
  /// Validates Hermiticity, idempotence and integral trace against `tol`.
  static Projector from_matrix(Matrix m, const Tolerance& tol = {});

  const Matrix& matrix() const noexcept { return matrix_; }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  Projector(Matrix m, std::size_t rank) : matrix_(std::move(m)), rank_(rank) {}

  Matrix matrix_;
  std::size_t rank_;
};

/// P = sum |v><v| over an orthonormal list. Throws DimensionMismatch or
/// NotOrthonormal (the message names the offending pair and overlap).
Projector projector_from_vectors(std::span<const Vector> vs, const Tolerance& tol = {});

/// <a|b>, conjugate-linear in `a`.
Complex inner(const Vector& a, const Vector& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Vector apply(const Matrix& m, const Vector& v);
Matrix adjoint(const Matrix& m);
Complex trace(const Matrix& m);

/// Modified Gram-Schmidt with one reorthogonalization pass. Throws
/// DegenerateInput when a residual norm falls to eps_zero or below.
std::vector<Vector> gram_schmidt(std::span<const Vector> vs, const Tolerance& tol = {});

/// Largest entry magnitude.
double max_abs(const Matrix& m);

bool is_hermitian(const Matrix& m, double eps);

/// exp(i H) for Hermitian H, computed from its eigendecomposition.
Matrix unitary_from_hermitian(const Matrix& h);

/// Orthonormal basis of the range of a projector (eigenvectors with
/// eigenvalue near 1). Each vector's largest component is made real positive.
std::vector<Vector> range_basis(const Projector& p);

}  // namespace decohere
