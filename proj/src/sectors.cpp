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

#include "swssb/sectors.hpp"

#include <stdexcept>
#include <string>

namespace swssb {

namespace {

void check_qubits(int N) {
  if (N < 1 || N > 12) {
    throw std::invalid_argument("qubit count " + std::to_string(N) +
                                " outside supported range [1, 12]");
  }
  check_dim(Index{1} << N);
}

void check_site(int N, int site) {
  if (site < 1 || site > N) {
    throw std::invalid_argument("site index " + std::to_string(site) +
                                " outside [1, " + std::to_string(N) + "]");
  }
}

// Bit mask of 1-based site index under the site-1-is-MSB convention.
std::uint64_t site_mask(int N, int site) {
  return std::uint64_t{1} << (N - site);
}

}  // namespace

Matrix build_pauli(const PauliSpec& spec) {
  check_qubits(spec.N);
  const Index dim = Index{1} << spec.N;
  Matrix out = Matrix::Zero(dim, dim);
  const std::uint64_t all = (std::uint64_t{1} << spec.N) - 1;
  switch (spec.kind) {
    case PauliKind::kGlobalFlip:
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        out(static_cast<Index>(x ^ all), static_cast<Index>(x)) = 1.0;
      }
      break;
    case PauliKind::kSingleZ: {
      check_site(spec.N, spec.site);
      const std::uint64_t m = site_mask(spec.N, spec.site);
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        out(static_cast<Index>(x), static_cast<Index>(x)) =
            (x & m) ? -1.0 : 1.0;
      }
      break;
    }
    case PauliKind::kSingleX: {
      check_site(spec.N, spec.site);
      const std::uint64_t m = site_mask(spec.N, spec.site);
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        out(static_cast<Index>(x ^ m), static_cast<Index>(x)) = 1.0;
      }
      break;
    }
    case PauliKind::kSPlus: {
      check_site(spec.N, spec.site);
      const std::uint64_t m = site_mask(spec.N, spec.site);
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        if (x & m) {
          out(static_cast<Index>(x & ~m), static_cast<Index>(x)) = 1.0;
        }
      }
      break;
    }
    case PauliKind::kSMinus: {
      check_site(spec.N, spec.site);
      const std::uint64_t m = site_mask(spec.N, spec.site);
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        if (!(x & m)) {
          out(static_cast<Index>(x | m), static_cast<Index>(x)) = 1.0;
        }
      }
      break;
    }
    case PauliKind::kCharge:
      for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(dim); ++x) {
        out(static_cast<Index>(x), static_cast<Index>(x)) =
            static_cast<double>(hamming_weight(x));
      }
      break;
  }
  return out;
}

Matrix z2_projector(int N) {
  check_qubits(N);
  const Index dim = Index{1} << N;
  Matrix p = build_pauli({N, PauliKind::kGlobalFlip});
  p += Matrix::Identity(dim, dim);
  return 0.5 * p;
}

SectorBasis u1_sector(int N, int Q) {
  check_qubits(N);
  if (Q < 0 || Q > N) {
    throw std::invalid_argument("charge " + std::to_string(Q) +
                                " outside [0, " + std::to_string(N) + "]");
  }
  const std::uint64_t dim = std::uint64_t{1} << N;
  SectorBasis basis;
  basis.N = N;
  basis.label = SectorLabel::kU1;
  basis.Q = Q;
  basis.full_to_sector.assign(dim, -1);
  for (std::uint64_t x = 0; x < dim; ++x) {
    if (hamming_weight(x) == Q) {
      basis.full_to_sector[x] =
          static_cast<std::int32_t>(basis.basis_index_map.size());
      basis.basis_index_map.push_back(x);
    }
  }
  basis.dim_sector = static_cast<Index>(basis.basis_index_map.size());
  return basis;
}

SectorBasis z2_sector(int N) {
  check_qubits(N);
  if (N < 2) {
    throw std::invalid_argument("z2_sector requires N >= 2");
  }
  const std::uint64_t half = std::uint64_t{1} << (N - 1);
  const std::vector<std::uint32_t> perm = encoder_permutation(N);
  SectorBasis basis;
  basis.N = N;
  basis.label = SectorLabel::kZ2Even;
  basis.dim_sector = static_cast<Index>(half);
  basis.basis_pair_map.reserve(half);
  for (std::uint64_t s = 0; s < half; ++s) {
    basis.basis_pair_map.push_back({perm[s], perm[s + half]});
  }
  return basis;
}

Matrix u1_projector(int N, int Q) {
  check_qubits(N);
  if (Q < 0 || Q > N) {
    throw std::invalid_argument("charge out of range");
  }
  const Index dim = Index{1} << N;
  Matrix p = Matrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    if (hamming_weight(static_cast<std::uint64_t>(x)) == Q) {
      p(x, x) = 1.0;
    }
  }
  return p;
}

Matrix sector_isometry(const SectorBasis& basis) {
  const Index dim = Index{1} << basis.N;
  Matrix v = Matrix::Zero(dim, basis.dim_sector);
  if (basis.label == SectorLabel::kU1) {
    for (Index s = 0; s < basis.dim_sector; ++s) {
      v(static_cast<Index>(basis.basis_index_map[s]), s) = 1.0;
    }
  } else {
    const double amp = 1.0 / std::sqrt(2.0);
    for (Index s = 0; s < basis.dim_sector; ++s) {
      const auto& pair = basis.basis_pair_map[s];
      v(static_cast<Index>(pair[0]), s) = amp;
      v(static_cast<Index>(pair[1]), s) = amp;
    }
  }
  return v;
}

std::vector<std::uint32_t> encoder_permutation(int N) {
  check_qubits(N);
  if (N < 2) {
    throw std::invalid_argument("encoder_permutation requires N >= 2");
  }
  const std::uint64_t dim = std::uint64_t{1} << N;
  std::vector<std::uint32_t> perm(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    std::uint64_t y = x;
    for (int i = 1; i < N; ++i) {
      const std::uint64_t control = (y >> (N - i)) & 1;
      y ^= control << (N - (i + 1));
    }
    perm[x] = static_cast<std::uint32_t>(y);
  }
  return perm;
}

}  // namespace swssb
