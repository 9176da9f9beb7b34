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
#include <optional>
#include <vector>

#include "swssb/clifford.hpp"
#include "swssb/linalg.hpp"
#include "swssb/random.hpp"
#include "swssb/sectors.hpp"

namespace swssb {

enum class UnitaryMode { kHaar, kClifford, kPfc };
enum class SymmetryKind { kZ2, kU1 };
enum class PreparationPath { kFormula, kCircuit };

struct EnsembleSpec {
  int N = 4;
  long r = 2;  // projector rank, power of 2
  SymmetryKind symmetry = SymmetryKind::kZ2;
  int Q = -1;  // U(1) target charge
  UnitaryMode unitary_mode = UnitaryMode::kHaar;
  bool keyed = true;       // keyed(seed) vs fresh randomness
  std::uint64_t seed = 0;  // master seed in keyed mode
};

// Throws std::invalid_argument on malformed specs; prints a warning to
// stderr for U(1) charges with |Q - N/2| > sqrt(N), where postselection
// overhead grows.
void validate_ensemble_spec(const EnsembleSpec& spec);

struct PreparedState {
  Matrix rho;
  double acceptance_probability = 1.0;  // 1 for the Z2 construction
  // Engaged when rho is stored in a sector basis rather than the full
  // 2^N-dimensional space.
  std::optional<SectorBasis> sector;
  EnsembleSpec spec;
  std::uint64_t draw_index = 0;
};

// Haar-distributed unitary: QR of a complex Ginibre matrix with the
// triangular factor's diagonal phases normalized.
Matrix haar_unitary(Index dim, RandomStream& rng);

// First r columns of a Haar unitary (thin QR of a dim x r Ginibre block;
// same distribution, cheaper).
Matrix haar_isometry(Index dim, Index r, RandomStream& rng);

// Permutation-phase-Clifford unitary C . F . P with a fresh exactly
// uniform permutation (Fisher-Yates), fresh +-1 phases, fresh Clifford.
Matrix pfc_unitary(int N, RandomStream& rng);

// Keyed variant: permutation from a 32-round swap-or-not mixing network
// driven by keyed_hash, phases from the same hash, Clifford from a stream
// keyed off the same key.  Deterministic given (key, N).
Matrix pfc_unitary_keyed(int N, std::uint64_t key);

// Image map of the keyed mixing network on [0, dim); dim a power of 2.
std::vector<std::uint32_t> keyed_permutation_map(Index dim,
                                                 std::uint64_t key);

// CNOT staircase Enc = CN_{N-1,N} ... CN_{1,2} (CN_{1,2} first) as a dense
// permutation matrix; satisfies Enc (X_1 tensor I) Enc^dag = Xbar.
Matrix encoder_circuit(int N);

// Draws one unitary on `qubits` qubits according to spec.unitary_mode,
// consuming randomness from rng (PFC in keyed mode derives its hash key
// from the stream).
Matrix draw_unitary(int qubits, const EnsembleSpec& spec, RandomStream& rng);

// Rank-r flat state on the even sector of N qubits.  The formula path
// embeds U Pi_r U^dag / r through the sector isometry; the circuit path
// prepares |+><+| tensor |0..0><0..0| with the last log2(r) qubits
// depolarized, applies U on qubits 2..N, then the encoder.  Both paths
// agree to 1e-12 given the same drawn U.
PreparedState prepare_z2_state(const EnsembleSpec& spec, RandomStream& rng,
                               PreparationPath path);

// Same, but with the sub-space unitary supplied by the caller.
PreparedState prepare_z2_state_from(const EnsembleSpec& spec,
                                    const Matrix& u_sub,
                                    PreparationPath path);

struct ChargeMeasurementResult {
  int charge = 0;
  Matrix post_state;
  double probability = 0.0;  // Tr(P_Q sigma) for the sampled Q
};

// Projective charge measurement as a channel: samples Q with probability
// Tr(P_Q sigma), returns the renormalized projected state.
ChargeMeasurementResult charge_measurement(const Matrix& sigma,
                                           RandomStream& rng);

// Charge-Q state P_Q U Pi_r U^dag P_Q / Tr(P_Q U Pi_r U^dag) on the full
// 2^N space.  Default projects exactly; postselect_sampled instead loops
// charge_measurement on the same draw until the outcome is Q (identical
// statistics, simulated overhead).
PreparedState prepare_u1_state(const EnsembleSpec& spec, RandomStream& rng,
                               bool postselect_sampled = false);

// Same state in the d_Q-dimensional sector basis; usable beyond the
// full-space comfort zone (haar mode draws only the needed isometry).
PreparedState prepare_u1_sector_state(const EnsembleSpec& spec,
                                      RandomStream& rng);

// rho_0 = (I + Xbar)/2^N for Z2; rho_Q = P_Q / C(N,Q) for U(1).
Matrix reference_state(SymmetryKind symmetry, int N, int Q = -1);

}  // namespace swssb
