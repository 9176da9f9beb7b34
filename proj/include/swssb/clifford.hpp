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

#include <cstdint>
#include <vector>

#include "swssb/linalg.hpp"
#include "swssb/random.hpp"

namespace swssb {

// Pauli operator up to sign, as X/Z bit masks over n qubits (site i is bit
// n-i, matching the basis-index convention).  The Hermitian representative
// is P(a, b) = i^{|a & b|} X^a Z^b.
struct PauliMask {
  std::uint32_t a = 0;  // X part
  std::uint32_t b = 0;  // Z part
};

// Clifford element described by its conjugation action:
//   C X_i C^dag = sign_x[i] * P(x_image[i])
//   C Z_i C^dag = sign_z[i] * P(z_image[i])
// The images form a symplectic basis of F_2^{2n}; any such tableau plus
// sign choices determines C uniquely up to global phase.
struct CliffordTableau {
  int n = 0;
  std::vector<PauliMask> x_image;
  std::vector<PauliMask> z_image;
  std::vector<int> sign_x;  // +1 or -1
  std::vector<int> sign_z;
};

// Uniformly random tableau: a uniform symplectic basis sampled pair by
// pair (random vector projected to the symplectic complement of the pairs
// chosen so far, rejection on degenerate draws), plus 2n uniform sign bits.
CliffordTableau sample_clifford_tableau(int n, RandomStream& rng);

// Dense 2^n x 2^n unitary realizing the tableau: builds the stabilizer
// state C|0..0> from the Z-image projectors, then fills column x with the
// signed Pauli product for X^x applied to it.
Matrix clifford_matrix(const CliffordTableau& tableau);

// Uniformly random n-qubit Clifford as a dense matrix; n <= 8.
Matrix random_clifford(int n, RandomStream& rng);

}  // namespace swssb
