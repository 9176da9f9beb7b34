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

#include <array>
#include <cstdint>
#include <vector>

#include "swssb/linalg.hpp"

namespace swssb {

// Computational-basis convention used across the library: site 1 is the
// most significant bit of the basis index, so |x_1 x_2 ... x_N> has index
// sum_i x_i 2^{N-i} and lexicographic bitstring order equals numeric order.

enum class PauliKind {
  kGlobalFlip,  // Xbar = X_1 X_2 ... X_N
  kSingleZ,     // Z_i
  kSingleX,     // X_i
  kSPlus,       // S_i^+ = (X_i + i Y_i)/2 = |0><1| at site i
  kSMinus,      // S_i^- = (S_i^+)^dagger
  kCharge,      // Qhat = sum_i (I - Z_i)/2, counts set bits
};

struct PauliSpec {
  int N = 1;
  PauliKind kind = PauliKind::kSingleZ;
  int site = 1;  // 1-based; ignored for kGlobalFlip and kCharge
};

Matrix build_pauli(const PauliSpec& spec);

// Even-sector projector P0 = (I + Xbar)/2 on 2^N dimensions.
Matrix z2_projector(int N);

enum class SectorLabel { kZ2Even, kU1 };

struct SectorBasis {
  int N = 1;
  SectorLabel label = SectorLabel::kU1;
  int Q = -1;  // U(1) charge; -1 for the Z2-even sector
  Index dim_sector = 0;
  // U(1): basis vector s is the computational state |basis_index_map[s]>,
  // enumerated in lexicographic (= numeric) order over Hamming-weight-Q
  // strings.  Empty for Z2.
  std::vector<std::uint64_t> basis_index_map;
  // Z2: basis vector s is (|a> + |b>)/sqrt(2) with {a, b} =
  // basis_pair_map[s], the two encoder images of syndrome s.  Empty for U(1).
  std::vector<std::array<std::uint64_t, 2>> basis_pair_map;
  // U(1): full-space index -> sector index, -1 outside the sector.  Empty
  // for Z2.
  std::vector<std::int32_t> full_to_sector;
};

// Hamming-weight-Q sector of N qubits.  Throws if Q is out of [0, N].
SectorBasis u1_sector(int N, int Q);

// Even (Xbar = +1) sector of N qubits, realized through the CNOT-staircase
// encoder so that basis vector s is Enc(|+> tensor |s>).
SectorBasis z2_sector(int N);

// Diagonal 0/1 projector onto the Hamming-weight-Q subspace.
Matrix u1_projector(int N, int Q);

// 2^N x dim_sector isometry whose columns are the sector basis vectors.
Matrix sector_isometry(const SectorBasis& basis);

// Image map of the CNOT staircase Enc = CN_{N-1,N} ... CN_{2,3} CN_{1,2}
// (gate CN_{1,2} acts first): perm[x] is the basis index of Enc|x>.
std::vector<std::uint32_t> encoder_permutation(int N);

inline int hamming_weight(std::uint64_t x) { return __builtin_popcountll(x); }

}  // namespace swssb
