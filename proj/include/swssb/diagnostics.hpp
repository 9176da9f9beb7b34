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

#include <optional>
#include <utility>
#include <vector>

#include "swssb/ensembles.hpp"
#include "swssb/linalg.hpp"
#include "swssb/random.hpp"
#include "swssb/sectors.hpp"

namespace swssb {

// Charged-operator family entering the two-point diagnostics; the pair
// operator is B = O_i O_j^dagger.
enum class ChargedOp {
  kZ,      // O_i = Z_i (Z2 order parameter)
  kX,      // O_i = X_i (alternative unitary choice)
  kSPlus,  // O_i = S_i^+ (U(1) order parameter; not unitary)
};

struct CorrelatorReport {
  int i = 0;
  int j = 0;
  ChargedOp op = ChargedOp::kZ;
  char kind = 'C';  // 'C', '1' (R1), '2' (R2), 'F'
  double value = 0.0;
};

// Shared-state evaluator for the two-point diagnostics.  Computing
// sqrt(rho) once per state dominates the cost, so batch evaluations (all
// pairs, several kinds) should go through one session.  Accepts either a
// full 2^N-dimensional state or a U(1) sector representation with its
// basis; every pair operator is monomial (at most one nonzero per column),
// which keeps each evaluation at O(dim^2).
class CorrelatorSession {
 public:
  explicit CorrelatorSession(Matrix rho);
  CorrelatorSession(Matrix rho_sector, SectorBasis basis);

  int num_sites() const { return n_; }

  // Tr(rho B); real part, imaginary part must be < 1e-9.
  double c(int i, int j, ChargedOp op) const;
  // Tr(sqrt(rho) B sqrt(rho) B^dagger).
  double r1(int i, int j, ChargedOp op) const;
  // Tr(rho B rho B^dagger) / Tr(rho^2).
  double r2(int i, int j, ChargedOp op) const;
  // fidelity(rho, B rho B^dagger); unitary op kinds only.
  double f(int i, int j, ChargedOp op) const;
  // Mean of r1 over all ordered pairs i != j.
  double aggregate_r1(ChargedOp op) const;

 private:
  struct MonomialOp {
    std::vector<Index> target;  // -1 when the column is annihilated
    std::vector<Complex> coeff;
  };

  MonomialOp pair_operator(int i, int j, ChargedOp op) const;
  const Matrix& sqrt_rho() const;
  // Tr(s B s B^dagger) for Hermitian s and monomial B.
  double sandwich(const Matrix& s, const MonomialOp& b) const;
  void check_sites(int i, int j) const;

  int n_ = 0;
  Matrix rho_;
  std::optional<SectorBasis> basis_;
  double purity_ = 0.0;
  mutable std::optional<Matrix> sqrt_;
};

// One-shot wrappers over CorrelatorSession for full-space states.
double correlator_C(const Matrix& rho, int i, int j, ChargedOp op);
double correlator_R1(const Matrix& rho, int i, int j, ChargedOp op);
double correlator_R2(const Matrix& rho, int i, int j, ChargedOp op);
double correlator_F(const Matrix& rho, int i, int j, ChargedOp op);
double aggregate_r1(const Matrix& rho, ChargedOp op);

// (strong, weak) symmetry residuals in trace norm: strong compares rho to
// its projection onto the symmetry sector (Z2: even sector; U(1): the
// heaviest charge sector), weak conjugates by the generator (Z2: Xbar;
// U(1): the charge rotation at angle 2 pi / 2^N).
std::pair<double, double> symmetry_residuals(const Matrix& rho,
                                             SymmetryKind symmetry);

// Simulated two-copy SWAP-test estimate of Tr(rho^2): `shots` Bernoulli
// trials at success probability (1 + Tr rho^2)/2.  Returns the unbiased
// estimate 2 p_hat - 1 and its binomial standard error.
std::pair<double, double> swap_test_purity(const Matrix& rho, long shots,
                                           RandomStream& rng);

}  // namespace swssb
