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

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace swssb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Dense operations are capped at this dimension; every entry point that
// allocates an Index x Index matrix validates against it first.
inline constexpr Index kMaxDim = 4096;

// Throws std::invalid_argument if dim is outside [1, kMaxDim].
void check_dim(Index dim);

bool is_hermitian(const Matrix& m, double tol = 1e-9);
bool is_unitary(const Matrix& m, double tol = 1e-9);
// Hermitian within tol and smallest eigenvalue >= -tol.
bool is_psd(const Matrix& m, double tol = 1e-9);
// Hermitian, PSD, and unit trace, all within tol.
bool is_density_matrix(const Matrix& m, double tol = 1e-9);

struct HermitianEig {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // column i pairs with eigenvalues[i]
};

// Full spectral decomposition of a Hermitian matrix.  Throws
// std::invalid_argument if m is not square/Hermitian within 1e-8.
HermitianEig hermitian_eig(const Matrix& m);

// Eigenvalues only (ascending); same validation as hermitian_eig.
RealVector hermitian_eigenvalues(const Matrix& m);

// Principal square root of a Hermitian PSD matrix.  Eigenvalues in
// [-1e-9, 0) are clamped to zero; anything below -1e-9 throws
// std::domain_error, non-Hermitian input throws std::invalid_argument.
Matrix matrix_sqrt_psd(const Matrix& m);

// Sum of singular values.  Hermitian inputs take an eigenvalue path; the
// general case uses an SVD.
double trace_norm(const Matrix& m);

// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).  Both arguments must
// be density matrices within 1e-9 (Hermitian, PSD, unit trace) or the call
// throws.
double fidelity(const Matrix& rho, const Matrix& sigma);

// Tr(rho^2) for a Hermitian rho (validated within 1e-8).
double purity(const Matrix& rho);

// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace swssb
