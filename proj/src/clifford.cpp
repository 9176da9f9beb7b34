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

#include "swssb/clifford.hpp"

#include <stdexcept>
#include <string>

namespace swssb {

namespace {

int parity(std::uint32_t x) { return __builtin_popcount(x) & 1; }

// Symplectic form <u, v> = u.a . v.b + u.b . v.a over F_2.
int symplectic_form(const PauliMask& u, const PauliMask& v) {
  return parity(u.a & v.b) ^ parity(u.b & v.a);
}

PauliMask mask_xor(const PauliMask& u, const PauliMask& v) {
  return PauliMask{u.a ^ v.a, u.b ^ v.b};
}

const Complex kIPowers[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                             Complex(0, -1)};

// Applies the Hermitian Pauli i^{|a&b|} X^a Z^b scaled by i^{extra_ipow} to
// vec: |x> -> i^{|a&b| + extra} (-1)^{|b&x|} |x xor a>.
Vector apply_pauli(const PauliMask& p, int extra_ipow, const Vector& vec) {
  const Index dim = vec.size();
  Vector out = Vector::Zero(dim);
  const int base_pow = (__builtin_popcount(p.a & p.b) + extra_ipow) & 3;
  for (Index x = 0; x < dim; ++x) {
    const Complex amp = vec[x];
    if (amp == Complex(0.0, 0.0)) continue;
    const int sign = parity(p.b & static_cast<std::uint32_t>(x));
    out[x ^ static_cast<Index>(p.a)] += kIPowers[(base_pow + 2 * sign) & 3] * amp;
  }
  return out;
}

}  // namespace

CliffordTableau sample_clifford_tableau(int n, RandomStream& rng) {
  if (n < 1 || n > 12) {
    throw std::invalid_argument("sample_clifford_tableau: n outside [1, 12]");
  }
  const std::uint32_t space = std::uint32_t{1} << (2 * n);
  const std::uint32_t low_mask = (std::uint32_t{1} << n) - 1;

  CliffordTableau tab;
  tab.n = n;
  tab.x_image.resize(n);
  tab.z_image.resize(n);
  tab.sign_x.resize(n);
  tab.sign_z.resize(n);

  auto unpack = [&](std::uint32_t bits) {
    return PauliMask{bits & low_mask, bits >> n};
  };
  // Projects v onto the symplectic complement of the pairs chosen so far.
  auto project = [&](PauliMask v, int chosen) {
    for (int j = 0; j < chosen; ++j) {
      if (symplectic_form(v, tab.x_image[j])) v = mask_xor(v, tab.z_image[j]);
      if (symplectic_form(v, tab.z_image[j])) v = mask_xor(v, tab.x_image[j]);
    }
    return v;
  };

  for (int i = 0; i < n; ++i) {
    PauliMask a;
    for (;;) {
      a = project(unpack(static_cast<std::uint32_t>(rng.uniform_below(space))),
                  i);
      if (a.a != 0 || a.b != 0) break;
    }
    PauliMask b;
    for (;;) {
      b = project(unpack(static_cast<std::uint32_t>(rng.uniform_below(space))),
                  i);
      if (symplectic_form(a, b)) break;
    }
    tab.x_image[i] = a;
    tab.z_image[i] = b;
  }
  for (int i = 0; i < n; ++i) tab.sign_x[i] = rng.bit() ? -1 : 1;
  for (int i = 0; i < n; ++i) tab.sign_z[i] = rng.bit() ? -1 : 1;
  return tab;
}

Matrix clifford_matrix(const CliffordTableau& tab) {
  const int n = tab.n;
  const Index dim = Index{1} << n;
  check_dim(dim);

  // Stabilizer state |psi> = C|0..0>: the unique (up to phase) unit vector
  // with s_i P(z_image[i]) |psi> = |psi> for all i.  Project candidate
  // basis vectors until one survives.
  Vector psi;
  bool found = false;
  for (Index w = 0; w < dim && !found; ++w) {
    Vector v = Vector::Zero(dim);
    v[w] = 1.0;
    for (int i = 0; i < n; ++i) {
      const int extra = tab.sign_z[i] < 0 ? 2 : 0;
      v = 0.5 * (v + apply_pauli(tab.z_image[i], extra, v));
    }
    if (v.squaredNorm() > 1e-12) {
      psi = v;
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("clifford_matrix: stabilizer state not found");
  }
  psi.normalize();
  // Canonical phase: first nonzero amplitude made real positive.
  const double floor = 0.5 / std::sqrt(static_cast<double>(dim));
  for (Index x = 0; x < dim; ++x) {
    if (std::abs(psi[x]) > floor) {
      psi *= std::conj(psi[x]) / std::abs(psi[x]);
      break;
    }
  }

  Matrix out(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    // Accumulate i^pow X^A Z^B = product over set sites of the signed
    // X-images; right-multiplying by s i^{|a&b|} X^a Z^b contributes
    // i^{|a&b| + 2|B&a| (+2 if s<0)} and XORs the masks.
    int pow = 0;
    PauliMask acc;
    for (int site = 1; site <= n; ++site) {
      if (!((x >> (n - site)) & 1)) continue;
      const PauliMask& p = tab.x_image[site - 1];
      pow += __builtin_popcount(p.a & p.b) +
             2 * __builtin_popcount(acc.b & p.a) +
             (tab.sign_x[site - 1] < 0 ? 2 : 0);
      acc = mask_xor(acc, p);
    }
    pow &= 3;
    // Column x = i^pow X^acc.a Z^acc.b |psi>.
    for (Index y = 0; y < dim; ++y) {
      const int total = (pow + 2 * parity(acc.b & static_cast<std::uint32_t>(y))) & 3;
      out(y ^ static_cast<Index>(acc.a), x) = kIPowers[total] * psi[y];
    }
  }
  return out;
}

Matrix random_clifford(int n, RandomStream& rng) {
  if (n < 1 || n > 8) {
    throw std::invalid_argument(
        "random_clifford: dense synthesis capped at n <= 8");
  }
  return clifford_matrix(sample_clifford_tableau(n, rng));
}

}  // namespace swssb
