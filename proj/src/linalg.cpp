// Copyright 2026 The swssb Authors
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

#include "swssb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace swssb {

void check_dim(Index dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("matrix dimension " + std::to_string(dim) +
                                " outside supported range [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

namespace {

void check_square(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matrix is not square");
  }
  check_dim(m.rows());
}

void require_hermitian(const Matrix& m, double tol, const char* who) {
  check_square(m);
  if (!is_hermitian(m, tol)) {
    throw std::invalid_argument(std::string(who) +
                                ": input is not Hermitian within tolerance");
  }
}

// Eigen 3.4's tridiagonal QL iteration occasionally reports NoConvergence on
// valid Hermitian inputs whose spectrum is strongly clustered, e.g. low-rank
// density matrices carrying hundreds of exactly degenerate zero eigenvalues.
// The complex Schur iteration uses a different shift strategy (including
// exceptional shifts) and handles those inputs, and for a Hermitian matrix
// the Schur form is diagonal, so its unitary factor is an eigenbasis.  Try
// the fast symmetric path first and fall back to Schur before giving up.
// Eigenvalues come out ascending either way.
void solve_hermitian(const Matrix& m, bool want_vectors, RealVector* values,
                     Matrix* vectors, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() == Eigen::Success) {
    *values = solver.eigenvalues();
    if (want_vectors) *vectors = solver.eigenvectors();
    return;
  }
  Eigen::ComplexSchur<Matrix> schur(m, want_vectors);
  if (schur.info() != Eigen::Success) {
    throw std::runtime_error(std::string(who) +
                             ": eigensolver failed to converge");
  }
  const RealVector raw = schur.matrixT().diagonal().real();
  std::vector<Index> order(static_cast<std::size_t>(raw.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&raw](Index a, Index b) { return raw[a] < raw[b]; });
  values->resize(raw.size());
  if (want_vectors) vectors->resize(m.rows(), m.cols());
  for (Index i = 0; i < raw.size(); ++i) {
    (*values)[i] = raw[order[static_cast<std::size_t>(i)]];
    if (want_vectors) {
      vectors->col(i) = schur.matrixU().col(order[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  Matrix gram = m.adjoint() * m;
  gram -= Matrix::Identity(m.rows(), m.cols());
  return gram.cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Matrix& m, double tol) {
  if (!is_hermitian(m, tol)) return false;
  RealVector vals;
  solve_hermitian(m, /*want_vectors=*/false, &vals, nullptr, "is_psd");
  return vals.minCoeff() >= -tol;
}

bool is_density_matrix(const Matrix& m, double tol) {
  if (!is_psd(m, tol)) return false;
  return std::abs(m.trace().real() - 1.0) <= tol &&
         std::abs(m.trace().imag()) <= tol;
}

HermitianEig hermitian_eig(const Matrix& m) {
  require_hermitian(m, 1e-8, "hermitian_eig");
  HermitianEig out;
  solve_hermitian(m, /*want_vectors=*/true, &out.eigenvalues,
                  &out.eigenvectors, "hermitian_eig");
  return out;
}

RealVector hermitian_eigenvalues(const Matrix& m) {
  require_hermitian(m, 1e-8, "hermitian_eigenvalues");
  RealVector vals;
  solve_hermitian(m, /*want_vectors=*/false, &vals, nullptr,
                  "hermitian_eigenvalues");
  return vals;
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  require_hermitian(m, 1e-9, "matrix_sqrt_psd");
  RealVector vals;
  Matrix vectors;
  solve_hermitian(m, /*want_vectors=*/true, &vals, &vectors,
                  "matrix_sqrt_psd");
  if (vals.minCoeff() < -1e-9) {
    throw std::domain_error(
        "matrix_sqrt_psd: input has eigenvalue below -1e-9 (not PSD)");
  }
  RealVector roots = vals.cwiseMax(0.0).cwiseSqrt();
  Matrix s = vectors * roots.asDiagonal() * vectors.adjoint();
  // Symmetrize away the last bits of rounding noise.
  return 0.5 * (s + Matrix(s.adjoint()));
}

double trace_norm(const Matrix& m) {
  check_dim(std::max(m.rows(), m.cols()));
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12)) {
    RealVector vals;
    solve_hermitian(m, /*want_vectors=*/false, &vals, nullptr, "trace_norm");
    return vals.cwiseAbs().sum();
  }
  if (std::max(m.rows(), m.cols()) <= 128) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  check_square(rho);
  check_square(sigma);
  if (rho.rows() != sigma.rows()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  for (const Matrix* m : {&rho, &sigma}) {
    if (!is_hermitian(*m, 1e-9)) {
      throw std::invalid_argument("fidelity: input is not Hermitian");
    }
    if (std::abs(m->trace().real() - 1.0) > 1e-9 ||
        std::abs(m->trace().imag()) > 1e-9) {
      throw std::invalid_argument("fidelity: input is not unit trace");
    }
  }
  Matrix s = matrix_sqrt_psd(rho);  // rejects non-PSD rho
  Matrix inner = s * sigma * s;
  inner = 0.5 * (inner + Matrix(inner.adjoint()));
  RealVector vals = hermitian_eigenvalues(inner);
  if (vals.minCoeff() < -1e-9) {
    throw std::domain_error("fidelity: second argument is not PSD");
  }
  return vals.cwiseMax(0.0).cwiseSqrt().sum();
}

double purity(const Matrix& rho) {
  require_hermitian(rho, 1e-8, "purity");
  // For Hermitian rho, Tr(rho^2) = Tr(rho rho^dagger) = ||rho||_F^2.
  return rho.squaredNorm();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  check_dim(a.rows() * b.rows());
  check_dim(a.cols() * b.cols());
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace swssb
