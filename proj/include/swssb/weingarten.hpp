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
#include <map>
#include <utility>
#include <vector>

#include "swssb/linalg.hpp"

namespace swssb {

// Element of the symmetric group S_k in 0-based one-line notation:
// images[i] is the image of point i.
struct Permutation {
  std::vector<int> images;
  int cycles = 0;  // cached cycle count

  int degree() const { return static_cast<int>(images.size()); }
};

Permutation identity_permutation(int k);
// compose(p, q) applies q first, then p: result(i) = p(q(i)).
Permutation compose(const Permutation& p, const Permutation& q);
Permutation inverse(const Permutation& p);
int cycle_count(const std::vector<int>& images);
// Cycle lengths sorted descending (a partition of k).
std::vector<int> cycle_type(const Permutation& p);

// All k! elements of S_k in lexicographic one-line order (identity first),
// each with its cycle count cached.  Throws for k outside [1, 6].
std::vector<Permutation> sk_elements(int k);

// Weingarten function of the unitary group U(d) at degree k, stored per
// conjugacy class.  Obtained by inverting the Gram matrix
// G[s][t] = d^{cycles(s t^{-1})} over S_k against the indicator of the
// identity, which is the defining linear system of the function.
struct WeingartenTable {
  int k = 0;
  long d = 0;
  std::map<std::vector<int>, double> values;  // cycle type -> Wg_d

  double value(const Permutation& p) const;
  double value_of_type(const std::vector<int>& type) const;
};

// Throws std::invalid_argument when d < k (singular Gram regime).
WeingartenTable weingarten_table(int k, long d);

// Returns (sum_{s in S_k} d^{cycles(s)}, (d-1+k)!/(d-1)!) as exact
// integers; the two are equal for every k, d.  Throws on overflow or k > 6.
std::pair<std::uint64_t, std::uint64_t> gram_sum_check(int k, long d);

struct WgBoundReport {
  bool abs_bounds_hold = false;      // |Wg(s)| <= 2 d^-k (d/4)^{cycles-k}
  bool identity_bound_holds = false;  // |Wg(e) d^k - 1| <= 2 k^2 / d^2
  double worst_abs_ratio = 0.0;      // max |Wg| / bound over classes
  double identity_deviation = 0.0;   // |Wg(e) d^k - 1|
};

// Checks the factor-2 envelope bounds on the table.  Requires d >= 4k^2,
// the regime where the subleading corrections are safely dominated.
WgBoundReport wg_bound_check(int k, long d);

// Exact k-fold Haar average E_U[U^{(x)k} O U^{t(x)k}] =
// sum_{s,t} Wg_d(s t^{-1}) Tr(t_hat^{-1} O) s_hat, with s_hat the
// permutation operators on k tensor factors of dimension D.
// Requires D >= k and D^k <= kMaxDim.
Matrix haar_twirl(const Matrix& op, int k, Index D);

// Exact k-th moment E[rho^{(x)k}] of the rank-r flat-spectrum ensemble
// rho = U Pi_r U^dagger / r with U Haar on the 2^{N-1}-dimensional even
// sector, returned in the sector basis.  Embeds to the full space through
// the sector isometry.  Requires (2^{N-1})^k <= kMaxDim and 2^{N-1} >= k.
Matrix exact_moment_z2(int N, long r, int k);

// Exact normalization moment f(k) = E[(Tr rho_tilde)^k] for the charge-Q
// postselected ensemble, with rho_tilde = (d/(r d_Q)) P_Q U Pi_r U^dag P_Q:
// f(k) = (d/(r d_Q))^k sum_{s,t} Wg_d(s t^{-1}) r^{cycles(t)} d_Q^{cycles(s)}.
double f_moment_u1(int N, int Q, long r, int k);

// Closed-form 2-design average of the rank-1 Renyi correlator
// Tr(sqrt(rho) B sqrt(rho) B^dagger) over the flat-spectrum rank-r ensemble
// on a D_s = 2^{N-1}-dimensional sector, for any sector-traceless unitary
// pair operator B (B B^dag = I, Tr B = 0).  Derived from the k=2 Weingarten
// coefficients: with sqrt(rho) = sqrt(r) rho, E R1 = (D_s/r)(Wg(e) r^2 +
// Wg(swap) r) = (r D_s - 1)/(D_s^2 - 1).
double exact_r1_z2(int N, long r);

// Exact mean of Tr(rho_tilde^2) for the charge-Q postselected ensemble
// (same rho_tilde as f_moment_u1), from the k=2 Weingarten coefficients:
// E = c^2 (alpha d_Q + beta d_Q^2) with c = d/(r d_Q),
// alpha = Wg(e) r^2 + Wg(swap) r, beta = Wg(swap) r^2 + Wg(e) r.
double u1_tilde_purity_mean(int N, int Q, long r);

}  // namespace swssb
