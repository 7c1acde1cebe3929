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

#include "decohere/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "decohere/errors.hpp"

namespace decohere {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotProjector: return "NotProjector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidBranch: return "InvalidBranch";
    case ErrorCode::TooManyBranches: return "TooManyBranches";
    case ErrorCode::TooManyGrainings: return "TooManyGrainings";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonRankOneSlot: return "NonRankOneSlot";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

void Tolerance::validate() const {
  if (!(eps_zero > 0.0) || !(eps_prob > 0.0) || eps_prob > eps_zero) {
    std::ostringstream os;
    os << "tolerance requires 0 < eps_prob <= eps_zero (got eps_zero=" << eps_zero
       << ", eps_prob=" << eps_prob << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

Complex make_scalar(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im)) {
    throw Error(ErrorCode::NonFinite, "complex scalar must be finite");
  }
  return {re, im};
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double eps) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= eps;
}

Projector Projector::from_matrix(Matrix m, const Tolerance& tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "projector must be a non-empty square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, "projector has non-finite entries");
  }
  const double herm = max_abs(m - m.adjoint());
  if (herm > tol.eps_zero) {
    std::ostringstream os;
    os << "not Hermitian (max |P - P^dagger| = " << herm << ")";
    throw Error(ErrorCode::NotProjector, os.str());
  }
  const double idem = max_abs(m * m - m);
  if (idem > tol.eps_zero) {
    std::ostringstream os;
    os << "not idempotent (max |P^2 - P| = " << idem << ")";
    throw Error(ErrorCode::NotProjector, os.str());
  }
  const Complex tr = m.trace();
  const double rounded = std::round(tr.real());
  if (std::abs(tr - Complex(rounded, 0.0)) > tol.eps_zero) {
    std::ostringstream os;
    os << "trace " << tr << " is not an integer";
    throw Error(ErrorCode::NotProjector, os.str());
  }
  return Projector(std::move(m), static_cast<std::size_t>(rounded));
}

Projector projector_from_vectors(std::span<const Vector> vs, const Tolerance& tol) {
  if (vs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "projector needs at least one vector");
  }
  const Eigen::Index dim = vs.front().size();
  for (const auto& v : vs) {
    if (v.size() != dim || dim == 0) {
      throw Error(ErrorCode::DimensionMismatch, "vectors must share a non-zero dimension");
    }
    if (!v.allFinite()) throw Error(ErrorCode::NonFinite, "vector has non-finite entries");
  }
  for (std::size_t a = 0; a < vs.size(); ++a) {
    const double norm_defect = std::abs(vs[a].norm() - 1.0);
    if (norm_defect > tol.eps_zero) {
      std::ostringstream os;
      os << "vector " << a << " has norm " << vs[a].norm();
      throw Error(ErrorCode::NotOrthonormal, os.str());
    }
    for (std::size_t b = a + 1; b < vs.size(); ++b) {
      const double overlap = std::abs(vs[a].dot(vs[b]));
      if (overlap > tol.eps_zero) {
        std::ostringstream os;
        os << "vectors " << a << " and " << b << " overlap with |<a|b>| = " << overlap;
        throw Error(ErrorCode::NotOrthonormal, os.str());
      }
    }
  }
  Matrix p = Matrix::Zero(dim, dim);
  for (const auto& v : vs) p += v * v.adjoint();
  return Projector::from_matrix(std::move(p), tol);
}

Complex inner(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inner product of vectors with different sizes");
  }
  // Eigen's dot() conjugates its left operand.
  return a.dot(b);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul shape mismatch");
  return a * b;
}

Vector apply(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) throw Error(ErrorCode::DimensionMismatch, "apply shape mismatch");
  return m * v;
}

Matrix adjoint(const Matrix& m) { return m.adjoint(); }

Complex trace(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "trace of non-square matrix");
  return m.trace();
}

std::vector<Vector> gram_schmidt(std::span<const Vector> vs, const Tolerance& tol) {
  std::vector<Vector> out;
  out.reserve(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!out.empty() && vs[i].size() != out.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, "gram_schmidt input vectors differ in size");
    }
    Vector r = vs[i];
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) r -= q * q.dot(r);
    }
    const double n = r.norm();
    if (!(n > tol.eps_zero)) {
      std::ostringstream os;
      os << "vector " << i << " is linearly dependent on its predecessors (residual " << n << ")";
      throw Error(ErrorCode::DegenerateInput, os.str());
    }
    out.push_back(r / n);
  }
  return out;
}

Matrix unitary_from_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases[i] = std::polar(1.0, lambda[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<Vector> range_basis(const Projector& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix());
  std::vector<Vector> out;
  const Eigen::Index n = es.eigenvalues().size();
  // Eigenvalues come sorted ascending; the top `rank` span the range.
  for (Eigen::Index i = n - static_cast<Eigen::Index>(p.rank()); i < n; ++i) {
    Vector v = es.eigenvectors().col(i);
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::conj(v[k]) / std::abs(v[k]);
    out.push_back(std::move(v));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace decohere
