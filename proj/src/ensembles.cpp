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

#include "swssb/ensembles.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace swssb {

namespace {

bool is_power_of_two(long x) { return x > 0 && (x & (x - 1)) == 0; }

int qubits_from_dim(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim) {
    throw std::invalid_argument("matrix dimension is not a power of 2");
  }
  return n;
}

}  // namespace

void validate_ensemble_spec(const EnsembleSpec& spec) {
  if (spec.N < 2 || spec.N > 12) {
    throw std::invalid_argument("EnsembleSpec: N outside [2, 12]");
  }
  if (!is_power_of_two(spec.r)) {
    throw std::invalid_argument("EnsembleSpec: rank must be a power of 2");
  }
  const long unitary_dim = spec.symmetry == SymmetryKind::kZ2
                               ? (1L << (spec.N - 1))
                               : (1L << spec.N);
  if (spec.r > unitary_dim) {
    throw std::invalid_argument(
        "EnsembleSpec: rank exceeds the drawn unitary's dimension " +
        std::to_string(unitary_dim));
  }
  if (spec.symmetry == SymmetryKind::kU1) {
    if (spec.Q < 0 || spec.Q > spec.N) {
      throw std::invalid_argument("EnsembleSpec: U(1) charge outside [0, N]");
    }
    if (std::abs(spec.Q - 0.5 * spec.N) > std::sqrt(spec.N)) {
      std::fprintf(stderr,
                   "warning: charge Q=%d far from N/2=%g; postselection "
                   "acceptance shrinks rapidly in this regime\n",
                   spec.Q, 0.5 * spec.N);
    }
  }
}

Matrix haar_unitary(Index dim, RandomStream& rng) {
  return haar_isometry(dim, dim, rng);
}

Matrix haar_isometry(Index dim, Index r, RandomStream& rng) {
  check_dim(dim);
  if (r < 1 || r > dim) {
    throw std::invalid_argument("haar_isometry: r outside [1, dim]");
  }
  Matrix ginibre(dim, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < dim; ++i) {
      ginibre(i, j) = Complex(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<Matrix> qr(ginibre);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, r);
  // Normalize the triangular factor's diagonal phases so the distribution
  // is exactly Haar rather than merely unitarily invariant.
  for (Index j = 0; j < r; ++j) {
    const Complex diag = qr.matrixQR()(j, j);
    const double mag = std::abs(diag);
    q.col(j) *= mag > 0.0 ? diag / mag : Complex(1.0, 0.0);
  }
  return q;
}

std::vector<std::uint32_t> keyed_permutation_map(Index dim,
                                                 std::uint64_t key) {
  check_dim(dim);
  if ((dim & (dim - 1)) != 0) {
    throw std::invalid_argument("keyed_permutation_map: dim must be 2^n");
  }
  const std::uint64_t mask = static_cast<std::uint64_t>(dim) - 1;
  constexpr int kRounds = 32;
  std::vector<std::uint32_t> perm(dim);
  for (Index x = 0; x < dim; ++x) {
    std::uint64_t v = static_cast<std::uint64_t>(x);
    for (int t = 0; t < kRounds; ++t) {
      // Swap-or-not round: pair v with K ^ v, decide the swap from a hash
      // of the pair's canonical representative so both members agree.
      const std::uint64_t partner_key =
          keyed_hash(key, 0x5A00 + static_cast<std::uint64_t>(t), 0) & mask;
      const std::uint64_t partner = partner_key ^ v;
      const std::uint64_t canon = v < partner ? v : partner;
      if (keyed_hash(key, 0x5B00 + static_cast<std::uint64_t>(t), canon) & 1) {
        v = partner;
      }
    }
    perm[x] = static_cast<std::uint32_t>(v);
  }
  return perm;
}

namespace {

// Assembles C . F . P given its three factors; P as an image map,
// F as +-1 phases indexed by the intermediate basis state.
Matrix assemble_pfc(const Matrix& clifford,
                    const std::vector<std::uint32_t>& perm,
                    const std::vector<double>& phases) {
  const Index dim = clifford.rows();
  Matrix out(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    // F P |x> = phases[perm[x]] |perm[x]>, so column x of the product is
    // that sign times the matching Clifford column.
    out.col(x) = phases[perm[x]] * clifford.col(perm[x]);
  }
  return out;
}

}  // namespace

Matrix pfc_unitary(int N, RandomStream& rng) {
  if (N < 1 || N > 8) {
    throw std::invalid_argument("pfc_unitary: N outside [1, 8]");
  }
  const Index dim = Index{1} << N;
  // Exactly uniform permutation via Fisher-Yates.
  std::vector<std::uint32_t> perm(dim);
  for (Index i = 0; i < dim; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (Index i = dim - 1; i > 0; --i) {
    const Index j = static_cast<Index>(
        rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<double> phases(dim);
  for (Index i = 0; i < dim; ++i) phases[i] = rng.bit() ? -1.0 : 1.0;
  const Matrix clifford = random_clifford(N, rng);
  return assemble_pfc(clifford, perm, phases);
}

Matrix pfc_unitary_keyed(int N, std::uint64_t key) {
  if (N < 1 || N > 8) {
    throw std::invalid_argument("pfc_unitary_keyed: N outside [1, 8]");
  }
  const Index dim = Index{1} << N;
  const std::vector<std::uint32_t> perm = keyed_permutation_map(dim, key);
  std::vector<double> phases(dim);
  for (Index i = 0; i < dim; ++i) {
    phases[i] =
        (keyed_hash(key, 0xF0, static_cast<std::uint64_t>(i)) & 1) ? -1.0 : 1.0;
  }
  RandomStream clifford_stream(keyed_hash(key, 0xC1, 0));
  const Matrix clifford = random_clifford(N, clifford_stream);
  return assemble_pfc(clifford, perm, phases);
}

Matrix encoder_circuit(int N) {
  const std::vector<std::uint32_t> perm = encoder_permutation(N);
  const Index dim = Index{1} << N;
  Matrix enc = Matrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    enc(static_cast<Index>(perm[x]), x) = 1.0;
  }
  return enc;
}

Matrix draw_unitary(int qubits, const EnsembleSpec& spec, RandomStream& rng) {
  switch (spec.unitary_mode) {
    case UnitaryMode::kHaar:
      return haar_unitary(Index{1} << qubits, rng);
    case UnitaryMode::kClifford:
      return random_clifford(qubits, rng);
    case UnitaryMode::kPfc:
      return spec.keyed ? pfc_unitary_keyed(qubits, rng.next_u64())
                        : pfc_unitary(qubits, rng);
  }
  throw std::logic_error("draw_unitary: unknown mode");
}

PreparedState prepare_z2_state(const EnsembleSpec& spec, RandomStream& rng,
                               PreparationPath path) {
  validate_ensemble_spec(spec);
  if (spec.symmetry != SymmetryKind::kZ2) {
    throw std::invalid_argument("prepare_z2_state: spec.symmetry must be Z2");
  }
  const Matrix u_sub = draw_unitary(spec.N - 1, spec, rng);
  return prepare_z2_state_from(spec, u_sub, path);
}

PreparedState prepare_z2_state_from(const EnsembleSpec& spec,
                                    const Matrix& u_sub,
                                    PreparationPath path) {
  validate_ensemble_spec(spec);
  const Index sector_dim = Index{1} << (spec.N - 1);
  if (u_sub.rows() != sector_dim || u_sub.cols() != sector_dim) {
    throw std::invalid_argument(
        "prepare_z2_state_from: unitary must act on 2^{N-1} dimensions");
  }
  // U Pi_r U^dag / r on the sector: Pi_r projects onto the first r basis
  // states, so only the first r columns of U enter.
  const Matrix cols = u_sub.leftCols(spec.r);
  const Matrix sector_state =
      (cols * cols.adjoint()) / static_cast<double>(spec.r);

  PreparedState out;
  out.spec = spec;
  if (path == PreparationPath::kFormula) {
    const Matrix v = sector_isometry(z2_sector(spec.N));
    out.rho = v * sector_state * v.adjoint();
  } else {
    // Circuit route: |+><+| on qubit 1, the sector state on qubits 2..N
    // (|0..0> with the last log2 r qubits depolarized is exactly Pi_r / r
    // in the syndrome register, already conjugated by U above), then the
    // encoder permutation on the assembled matrix.
    Matrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    const Matrix full = kron(plus, sector_state);
    const std::vector<std::uint32_t> perm = encoder_permutation(spec.N);
    const Index dim = Index{1} << spec.N;
    Matrix rho(dim, dim);
    for (Index x = 0; x < dim; ++x) {
      for (Index y = 0; y < dim; ++y) {
        rho(static_cast<Index>(perm[x]), static_cast<Index>(perm[y])) =
            full(x, y);
      }
    }
    out.rho = std::move(rho);
  }
  out.acceptance_probability = 1.0;
  return out;
}

ChargeMeasurementResult charge_measurement(const Matrix& sigma,
                                           RandomStream& rng) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("charge_measurement: matrix must be square");
  }
  const int n = qubits_from_dim(sigma.rows());
  const Index dim = sigma.rows();
  std::vector<double> weight_prob(n + 1, 0.0);
  for (Index x = 0; x < dim; ++x) {
    weight_prob[hamming_weight(static_cast<std::uint64_t>(x))] +=
        std::max(0.0, sigma(x, x).real());
  }
  double total = 0.0;
  for (double p : weight_prob) total += p;
  if (total <= 0.0) {
    throw std::domain_error("charge_measurement: state has no diagonal mass");
  }

  const double u = rng.uniform() * total;
  int charge = n;
  double cumulative = 0.0;
  for (int q = 0; q <= n; ++q) {
    cumulative += weight_prob[q];
    if (u < cumulative) {
      charge = q;
      break;
    }
  }

  ChargeMeasurementResult result;
  result.charge = charge;
  result.probability = weight_prob[charge] / total;
  result.post_state = Matrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    if (hamming_weight(static_cast<std::uint64_t>(x)) != charge) continue;
    for (Index y = 0; y < dim; ++y) {
      if (hamming_weight(static_cast<std::uint64_t>(y)) != charge) continue;
      result.post_state(x, y) = sigma(x, y);
    }
  }
  result.post_state /= weight_prob[charge];
  return result;
}

PreparedState prepare_u1_state(const EnsembleSpec& spec, RandomStream& rng,
                               bool postselect_sampled) {
  validate_ensemble_spec(spec);
  if (spec.symmetry != SymmetryKind::kU1) {
    throw std::invalid_argument("prepare_u1_state: spec.symmetry must be U1");
  }
  const Index dim = Index{1} << spec.N;
  const Matrix u = draw_unitary(spec.N, spec, rng);
  const Matrix cols = u.leftCols(spec.r);
  const Matrix sigma = (cols * cols.adjoint()) / static_cast<double>(spec.r);

  double acceptance = 0.0;
  for (Index x = 0; x < dim; ++x) {
    if (hamming_weight(static_cast<std::uint64_t>(x)) == spec.Q) {
      acceptance += sigma(x, x).real();
    }
  }
  if (acceptance < 1e-12) {
    throw std::domain_error(
        "prepare_u1_state: acceptance probability below 1e-12 (degenerate "
        "projection)");
  }

  PreparedState out;
  out.spec = spec;
  out.acceptance_probability = acceptance;
  if (postselect_sampled) {
    constexpr long kMaxAttempts = 10'000'000;
    for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
      ChargeMeasurementResult m = charge_measurement(sigma, rng);
      if (m.charge == spec.Q) {
        out.rho = std::move(m.post_state);
        return out;
      }
    }
    throw std::runtime_error(
        "prepare_u1_state: postselection did not hit the target charge");
  }
  Matrix rho = Matrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    if (hamming_weight(static_cast<std::uint64_t>(x)) != spec.Q) continue;
    for (Index y = 0; y < dim; ++y) {
      if (hamming_weight(static_cast<std::uint64_t>(y)) != spec.Q) continue;
      rho(x, y) = sigma(x, y);
    }
  }
  out.rho = rho / acceptance;
  return out;
}

PreparedState prepare_u1_sector_state(const EnsembleSpec& spec,
                                      RandomStream& rng) {
  validate_ensemble_spec(spec);
  if (spec.symmetry != SymmetryKind::kU1) {
    throw std::invalid_argument(
        "prepare_u1_sector_state: spec.symmetry must be U1");
  }
  SectorBasis basis = u1_sector(spec.N, spec.Q);
  const Index dim = Index{1} << spec.N;

  // Only the charge-Q rows of the first r columns of U enter the state;
  // haar mode can draw just that isometry block.
  Matrix rows(basis.dim_sector, spec.r);
  if (spec.unitary_mode == UnitaryMode::kHaar) {
    const Matrix iso = haar_isometry(dim, spec.r, rng);
    for (Index s = 0; s < basis.dim_sector; ++s) {
      rows.row(s) = iso.row(static_cast<Index>(basis.basis_index_map[s]));
    }
  } else {
    const Matrix u = draw_unitary(spec.N, spec, rng);
    for (Index s = 0; s < basis.dim_sector; ++s) {
      rows.row(s) =
          u.row(static_cast<Index>(basis.basis_index_map[s])).head(spec.r);
    }
  }
  const Matrix m = rows * rows.adjoint();
  const double trace = m.trace().real();
  if (trace < 1e-12 * static_cast<double>(spec.r)) {
    throw std::domain_error(
        "prepare_u1_sector_state: acceptance probability is degenerate");
  }

  PreparedState out;
  out.spec = spec;
  out.acceptance_probability = trace / static_cast<double>(spec.r);
  out.rho = m / trace;
  out.sector = std::move(basis);
  return out;
}

Matrix reference_state(SymmetryKind symmetry, int N, int Q) {
  const Index dim = Index{1} << N;
  check_dim(dim);
  if (symmetry == SymmetryKind::kZ2) {
    return z2_projector(N) * (2.0 / static_cast<double>(dim));
  }
  if (Q < 0 || Q > N) {
    throw std::invalid_argument("reference_state: U(1) requires Q in [0, N]");
  }
  const Matrix p = u1_projector(N, Q);
  return p / p.trace().real();
}

}  // namespace swssb
