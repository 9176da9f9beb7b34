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

#include "swssb/weingarten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swssb {

namespace {

constexpr int kMaxDegree = 6;

void check_degree(int k) {
  if (k < 1 || k > kMaxDegree) {
    throw std::invalid_argument("permutation degree " + std::to_string(k) +
                                " outside supported range [1, " +
                                std::to_string(kMaxDegree) + "]");
  }
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long out = 1;
  for (int i = 0; i < k; ++i) {
    out = out * (n - i) / (i + 1);
  }
  return out;
}

}  // namespace

Permutation identity_permutation(int k) {
  check_degree(k);
  Permutation p;
  p.images.resize(k);
  std::iota(p.images.begin(), p.images.end(), 0);
  p.cycles = k;
  return p;
}

Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.degree() != q.degree()) {
    throw std::invalid_argument("compose: degree mismatch");
  }
  Permutation out;
  out.images.resize(p.images.size());
  for (std::size_t i = 0; i < p.images.size(); ++i) {
    out.images[i] = p.images[q.images[i]];
  }
  out.cycles = cycle_count(out.images);
  return out;
}

Permutation inverse(const Permutation& p) {
  Permutation out;
  out.images.resize(p.images.size());
  for (std::size_t i = 0; i < p.images.size(); ++i) {
    out.images[p.images[i]] = static_cast<int>(i);
  }
  out.cycles = cycle_count(out.images);
  return out;
}

int cycle_count(const std::vector<int>& images) {
  std::vector<bool> seen(images.size(), false);
  int cycles = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    std::size_t j = i;
    while (!seen[j]) {
      seen[j] = true;
      j = static_cast<std::size_t>(images[j]);
    }
  }
  return cycles;
}

std::vector<int> cycle_type(const Permutation& p) {
  std::vector<bool> seen(p.images.size(), false);
  std::vector<int> type;
  for (std::size_t i = 0; i < p.images.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    std::size_t j = i;
    while (!seen[j]) {
      seen[j] = true;
      j = static_cast<std::size_t>(p.images[j]);
      ++len;
    }
    type.push_back(len);
  }
  std::sort(type.begin(), type.end(), std::greater<int>());
  return type;
}

std::vector<Permutation> sk_elements(int k) {
  check_degree(k);
  std::vector<int> line(k);
  std::iota(line.begin(), line.end(), 0);
  std::vector<Permutation> elems;
  do {
    Permutation p;
    p.images = line;
    p.cycles = cycle_count(line);
    elems.push_back(std::move(p));
  } while (std::next_permutation(line.begin(), line.end()));
  return elems;
}

double WeingartenTable::value(const Permutation& p) const {
  return value_of_type(cycle_type(p));
}

double WeingartenTable::value_of_type(const std::vector<int>& type) const {
  auto it = values.find(type);
  if (it == values.end()) {
    throw std::invalid_argument("WeingartenTable: unknown cycle type");
  }
  return it->second;
}

WeingartenTable weingarten_table(int k, long d) {
  check_degree(k);
  if (d < k) {
    throw std::invalid_argument(
        "weingarten_table: requires d >= k (Gram matrix is singular below)");
  }
  const std::vector<Permutation> elems = sk_elements(k);
  const Index n = static_cast<Index>(elems.size());
  RealMatrix gram(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Permutation rel = compose(elems[i], inverse(elems[j]));
      gram(i, j) = std::pow(static_cast<double>(d), rel.cycles);
    }
  }
  RealVector rhs = RealVector::Zero(n);
  rhs[0] = 1.0;  // elems[0] is the identity (lexicographic order)
  RealVector wg = gram.partialPivLu().solve(rhs);

  WeingartenTable table;
  table.k = k;
  table.d = d;
  // Collapse to a class function, checking that same-class entries agree.
  std::map<std::vector<int>, std::pair<double, int>> accum;
  for (Index i = 0; i < n; ++i) {
    auto& slot = accum[cycle_type(elems[i])];
    slot.first += wg[i];
    slot.second += 1;
  }
  for (Index i = 0; i < n; ++i) {
    const auto& slot = accum[cycle_type(elems[i])];
    const double mean = slot.first / slot.second;
    if (std::abs(wg[i] - mean) > 1e-8 * std::max(1.0, std::abs(mean))) {
      throw std::runtime_error(
          "weingarten_table: solution is not a class function "
          "(numerical failure)");
    }
  }
  for (const auto& [type, slot] : accum) {
    table.values[type] = slot.first / slot.second;
  }
  return table;
}

std::pair<std::uint64_t, std::uint64_t> gram_sum_check(int k, long d) {
  check_degree(k);
  if (d < 1) {
    throw std::invalid_argument("gram_sum_check: d must be positive");
  }
  unsigned __int128 lhs = 0;
  for (const Permutation& p : sk_elements(k)) {
    unsigned __int128 term = 1;
    for (int i = 0; i < p.cycles; ++i) {
      term *= static_cast<unsigned __int128>(d);
    }
    lhs += term;
  }
  unsigned __int128 rhs = 1;
  for (int i = 0; i < k; ++i) {
    rhs *= static_cast<unsigned __int128>(d + i);
  }
  if (lhs > std::numeric_limits<std::uint64_t>::max() ||
      rhs > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("gram_sum_check: sums exceed 64-bit range");
  }
  return {static_cast<std::uint64_t>(lhs), static_cast<std::uint64_t>(rhs)};
}

WgBoundReport wg_bound_check(int k, long d) {
  check_degree(k);
  if (d < 4L * k * k) {
    throw std::invalid_argument("wg_bound_check: requires d >= 4k^2");
  }
  const WeingartenTable table = weingarten_table(k, d);
  WgBoundReport report;
  report.abs_bounds_hold = true;
  const double dd = static_cast<double>(d);
  for (const auto& [type, wg] : table.values) {
    const int cycles = static_cast<int>(type.size());
    const double bound =
        2.0 * std::pow(dd, -k) * std::pow(dd / 4.0, cycles - k);
    const double ratio = std::abs(wg) / bound;
    report.worst_abs_ratio = std::max(report.worst_abs_ratio, ratio);
    if (ratio > 1.0) report.abs_bounds_hold = false;
  }
  std::vector<int> identity_type(k, 1);
  const double wg_e = table.value_of_type(identity_type);
  report.identity_deviation = std::abs(wg_e * std::pow(dd, k) - 1.0);
  report.identity_bound_holds =
      report.identity_deviation <= 2.0 * k * k / (dd * dd);
  return report;
}

namespace {

// Decodes a k-digit base-D multi-index, big-endian (tensor factor 0 is the
// most significant digit, matching kron()).
void decode_index(Index value, int k, Index D, int* digits) {
  for (int i = k - 1; i >= 0; --i) {
    digits[i] = static_cast<int>(value % D);
    value /= D;
  }
}

Index encode_index(const int* digits, int k, Index D) {
  Index value = 0;
  for (int i = 0; i < k; ++i) {
    value = value * D + digits[i];
  }
  return value;
}

// Adds coeff * s_hat to out, where s_hat permutes tensor factors:
// s_hat |j_1 ... j_k> = |j_{s^{-1}(1)} ... j_{s^{-1}(k)}>, i.e. the entry
// at (row, col) is nonzero when row_digit[i] = col_digit[s^{-1}(i)].
void accumulate_permutation_operator(Matrix& out, const Permutation& s,
                                     Index D, Complex coeff) {
  const int k = s.degree();
  const Permutation sinv = inverse(s);
  const Index dim = out.rows();
  int col_digits[kMaxDegree];
  int row_digits[kMaxDegree];
  for (Index col = 0; col < dim; ++col) {
    decode_index(col, k, D, col_digits);
    for (int i = 0; i < k; ++i) {
      row_digits[i] = col_digits[sinv.images[i]];
    }
    out(encode_index(row_digits, k, D), col) += coeff;
  }
}

Index checked_power(Index base, int exp) {
  Index out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > kMaxDim / base) {
      throw std::invalid_argument("tensor dimension exceeds supported cap");
    }
    out *= base;
  }
  return out;
}

}  // namespace

Matrix haar_twirl(const Matrix& op, int k, Index D) {
  check_degree(k);
  if (D < k) {
    throw std::invalid_argument("haar_twirl: requires D >= k");
  }
  const Index dim = checked_power(D, k);
  if (op.rows() != dim || op.cols() != dim) {
    throw std::invalid_argument("haar_twirl: operator must be D^k x D^k");
  }
  const std::vector<Permutation> elems = sk_elements(k);
  const WeingartenTable table = weingarten_table(k, D);

  // t[tau] = Tr(tau_hat^{-1} op) = sum_y op(y o tau^{-1}, y) where
  // (y o tau^{-1})_i = y_{tau^{-1}(i)}; the inverse orientation matters for
  // non-involutions (k >= 3).
  std::vector<Complex> traces(elems.size(), Complex(0.0, 0.0));
  int col_digits[kMaxDegree];
  int row_digits[kMaxDegree];
  for (std::size_t t = 0; t < elems.size(); ++t) {
    const Permutation tau_inv = inverse(elems[t]);
    Complex sum(0.0, 0.0);
    for (Index col = 0; col < dim; ++col) {
      decode_index(col, k, D, col_digits);
      for (int i = 0; i < k; ++i) {
        row_digits[i] = col_digits[tau_inv.images[i]];
      }
      sum += op(encode_index(row_digits, k, D), col);
    }
    traces[t] = sum;
  }

  Matrix out = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < elems.size(); ++s) {
    Complex coeff(0.0, 0.0);
    for (std::size_t t = 0; t < elems.size(); ++t) {
      const Permutation rel = compose(elems[s], inverse(elems[t]));
      coeff += table.value(rel) * traces[t];
    }
    accumulate_permutation_operator(out, elems[s], D, coeff);
  }
  return out;
}

Matrix exact_moment_z2(int N, long r, int k) {
  check_degree(k);
  if (N < 2) {
    throw std::invalid_argument("exact_moment_z2: requires N >= 2");
  }
  const Index sector_dim = Index{1} << (N - 1);
  if (sector_dim < k) {
    throw std::invalid_argument("exact_moment_z2: requires 2^{N-1} >= k");
  }
  if (r < 1 || r > sector_dim) {
    throw std::invalid_argument("exact_moment_z2: rank outside [1, 2^{N-1}]");
  }
  const Index dim = checked_power(sector_dim, k);
  const std::vector<Permutation> elems = sk_elements(k);
  const WeingartenTable table = weingarten_table(k, sector_dim);

  // Tr(tau_hat^{-1} Pi_r^{(x)k}) = r^{cycles(tau)}, so the moment is
  // sum_s [sum_t Wg(s t^{-1}) r^{cycles(t) - k}] s_hat.
  Matrix out = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < elems.size(); ++s) {
    double coeff = 0.0;
    for (std::size_t t = 0; t < elems.size(); ++t) {
      const Permutation rel = compose(elems[s], inverse(elems[t]));
      coeff += table.value(rel) *
               std::pow(static_cast<double>(r), elems[t].cycles - k);
    }
    accumulate_permutation_operator(out, elems[s], sector_dim,
                                    Complex(coeff, 0.0));
  }
  return out;
}

double f_moment_u1(int N, int Q, long r, int k) {
  check_degree(k);
  if (N < 1 || N > 12) {
    throw std::invalid_argument("f_moment_u1: N outside [1, 12]");
  }
  if (Q < 0 || Q > N) {
    throw std::invalid_argument("f_moment_u1: Q outside [0, N]");
  }
  const long d = 1L << N;
  if (d < k) {
    throw std::invalid_argument("f_moment_u1: requires 2^N >= k");
  }
  if (r < 1 || r > d) {
    throw std::invalid_argument("f_moment_u1: rank outside [1, 2^N]");
  }
  const double d_q = static_cast<double>(binomial(N, Q));
  const std::vector<Permutation> elems = sk_elements(k);
  const WeingartenTable table = weingarten_table(k, d);
  double sum = 0.0;
  for (const Permutation& s : elems) {
    double row = 0.0;
    for (const Permutation& t : elems) {
      const Permutation rel = compose(s, inverse(t));
      row += table.value(rel) * std::pow(static_cast<double>(r), t.cycles);
    }
    sum += row * std::pow(d_q, s.cycles);
  }
  const double scale = static_cast<double>(d) / (static_cast<double>(r) * d_q);
  return std::pow(scale, k) * sum;
}

double exact_r1_z2(int N, long r) {
  if (N < 2) {
    throw std::invalid_argument("exact_r1_z2: requires N >= 2");
  }
  const double sector_dim = std::pow(2.0, N - 1);
  if (r < 1 || static_cast<double>(r) > sector_dim) {
    throw std::invalid_argument("exact_r1_z2: rank outside [1, 2^{N-1}]");
  }
  return (static_cast<double>(r) * sector_dim - 1.0) /
         (sector_dim * sector_dim - 1.0);
}

double u1_tilde_purity_mean(int N, int Q, long r) {
  if (N < 1 || N > 12 || Q < 0 || Q > N) {
    throw std::invalid_argument("u1_tilde_purity_mean: bad N or Q");
  }
  const double d = std::pow(2.0, N);
  if (r < 1 || static_cast<double>(r) > d) {
    throw std::invalid_argument("u1_tilde_purity_mean: rank outside [1, 2^N]");
  }
  const double d_q = static_cast<double>(binomial(N, Q));
  const double rr = static_cast<double>(r);
  const double wg_e = 1.0 / (d * d - 1.0);
  const double wg_swap = -1.0 / (d * (d * d - 1.0));
  const double alpha = wg_e * rr * rr + wg_swap * rr;
  const double beta = wg_swap * rr * rr + wg_e * rr;
  const double c = d / (rr * d_q);
  return c * c * (alpha * d_q + beta * d_q * d_q);
}

}  // namespace swssb
