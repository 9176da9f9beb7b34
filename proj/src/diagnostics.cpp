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

#include "swssb/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace swssb {

namespace {

int qubits_from_dim(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim) {
    throw std::invalid_argument("state dimension is not a power of 2");
  }
  return n;
}

}  // namespace

CorrelatorSession::CorrelatorSession(Matrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) {
    throw std::invalid_argument("CorrelatorSession: state must be square");
  }
  check_dim(rho_.rows());
  n_ = qubits_from_dim(rho_.rows());
  if (!is_hermitian(rho_, 1e-8)) {
    throw std::invalid_argument("CorrelatorSession: state must be Hermitian");
  }
  purity_ = rho_.squaredNorm();
}

CorrelatorSession::CorrelatorSession(Matrix rho_sector, SectorBasis basis)
    : rho_(std::move(rho_sector)), basis_(std::move(basis)) {
  if (basis_->label != SectorLabel::kU1) {
    throw std::invalid_argument(
        "CorrelatorSession: sector representation is supported for U(1) "
        "bases only; embed Z2 states into the full space instead");
  }
  if (rho_.rows() != rho_.cols() || rho_.rows() != basis_->dim_sector) {
    throw std::invalid_argument(
        "CorrelatorSession: state dimension does not match the sector");
  }
  check_dim(rho_.rows());
  n_ = basis_->N;
  if (!is_hermitian(rho_, 1e-8)) {
    throw std::invalid_argument("CorrelatorSession: state must be Hermitian");
  }
  purity_ = rho_.squaredNorm();
}

void CorrelatorSession::check_sites(int i, int j) const {
  if (i < 1 || i > n_ || j < 1 || j > n_) {
    throw std::invalid_argument("site index outside [1, N]");
  }
  if (i == j) {
    throw std::invalid_argument("two-point diagnostics require i != j");
  }
}

CorrelatorSession::MonomialOp CorrelatorSession::pair_operator(
    int i, int j, ChargedOp op) const {
  check_sites(i, j);
  const std::uint64_t mask_i = std::uint64_t{1} << (n_ - i);
  const std::uint64_t mask_j = std::uint64_t{1} << (n_ - j);

  // Column action of B = O_i O_j^dagger on a full-space basis index.
  auto full_action = [&](std::uint64_t x, Index& target, Complex& coeff) {
    switch (op) {
      case ChargedOp::kZ: {
        const int bits = ((x & mask_i) ? 1 : 0) + ((x & mask_j) ? 1 : 0);
        target = static_cast<Index>(x);
        coeff = (bits == 1) ? -1.0 : 1.0;
        return;
      }
      case ChargedOp::kX:
        target = static_cast<Index>(x ^ mask_i ^ mask_j);
        coeff = 1.0;
        return;
      case ChargedOp::kSPlus:
        // S_i^+ S_j^-: needs bit j clear and bit i set; moves the
        // excitation from site i to site j.
        if ((x & mask_i) && !(x & mask_j)) {
          target = static_cast<Index>(x ^ mask_i ^ mask_j);
          coeff = 1.0;
        } else {
          target = -1;
          coeff = 0.0;
        }
        return;
    }
    throw std::logic_error("unknown charged operator");
  };

  MonomialOp out;
  const Index dim = rho_.rows();
  out.target.resize(dim);
  out.coeff.resize(dim);
  if (!basis_) {
    for (Index x = 0; x < dim; ++x) {
      full_action(static_cast<std::uint64_t>(x), out.target[x], out.coeff[x]);
    }
    return out;
  }
  // Sector representation: map through the full space and back; a target
  // that leaves the sector annihilates the column.
  for (Index s = 0; s < dim; ++s) {
    Index full_target = -1;
    Complex coeff(0.0, 0.0);
    full_action(basis_->basis_index_map[s], full_target, coeff);
    if (full_target >= 0) {
      const std::int32_t mapped = basis_->full_to_sector[full_target];
      out.target[s] = mapped >= 0 ? static_cast<Index>(mapped) : -1;
      out.coeff[s] = mapped >= 0 ? coeff : Complex(0.0, 0.0);
    } else {
      out.target[s] = -1;
      out.coeff[s] = Complex(0.0, 0.0);
    }
  }
  return out;
}

const Matrix& CorrelatorSession::sqrt_rho() const {
  if (!sqrt_) {
    sqrt_ = matrix_sqrt_psd(rho_);
  }
  return *sqrt_;
}

double CorrelatorSession::sandwich(const Matrix& s,
                                   const MonomialOp& b) const {
  // Tr(s B s B^dag) with monomial B|a> = coeff(a)|t(a)>:
  // (B s B^dag)(t(a), t(b)) = coeff(a) s(a, b) conj(coeff(b)), so the trace
  // against s contracts to sum_{a,b} s(t(b), t(a)) coeff(a) s(a, b)
  // conj(coeff(b)).
  const Index dim = s.rows();
  Complex total(0.0, 0.0);
  for (Index bcol = 0; bcol < dim; ++bcol) {
    if (b.target[bcol] < 0) continue;
    const Index tb = b.target[bcol];
    const Complex cb = std::conj(b.coeff[bcol]);
    Complex partial(0.0, 0.0);
    for (Index a = 0; a < dim; ++a) {
      if (b.target[a] < 0) continue;
      partial += s(tb, b.target[a]) * b.coeff[a] * s(a, bcol);
    }
    total += partial * cb;
  }
  if (std::abs(total.imag()) > 1e-7 * std::max(1.0, std::abs(total.real()))) {
    throw std::runtime_error(
        "correlator evaluation produced a non-real trace (state is not "
        "Hermitian enough)");
  }
  return total.real();
}

double CorrelatorSession::c(int i, int j, ChargedOp op) const {
  const MonomialOp b = pair_operator(i, j, op);
  const Index dim = rho_.rows();
  Complex total(0.0, 0.0);
  // Tr(rho B) = sum_x rho(x, t(x)) coeff(x).
  for (Index x = 0; x < dim; ++x) {
    if (b.target[x] < 0) continue;
    total += rho_(x, b.target[x]) * b.coeff[x];
  }
  if (std::abs(total.imag()) > 1e-9) {
    throw std::domain_error(
        "correlator_C: imaginary part exceeds 1e-9 for this state");
  }
  return total.real();
}

double CorrelatorSession::r1(int i, int j, ChargedOp op) const {
  return sandwich(sqrt_rho(), pair_operator(i, j, op));
}

double CorrelatorSession::r2(int i, int j, ChargedOp op) const {
  if (purity_ <= 1e-12) {
    throw std::domain_error("correlator_R2: state purity is degenerate");
  }
  return sandwich(rho_, pair_operator(i, j, op)) / purity_;
}

double CorrelatorSession::f(int i, int j, ChargedOp op) const {
  if (op == ChargedOp::kSPlus) {
    throw std::invalid_argument(
        "correlator_F: the fidelity correlator requires a unitary charged "
        "operator (Z or X); S+ is not unitary");
  }
  const MonomialOp b = pair_operator(i, j, op);
  const Index dim = rho_.rows();
  for (Index x = 0; x < dim; ++x) {
    if (b.target[x] < 0) {
      throw std::invalid_argument(
          "correlator_F: operator is not unitary on this sector");
    }
  }
  Matrix conjugated(dim, dim);
  for (Index a = 0; a < dim; ++a) {
    for (Index bcol = 0; bcol < dim; ++bcol) {
      conjugated(b.target[a], b.target[bcol]) =
          b.coeff[a] * rho_(a, bcol) * std::conj(b.coeff[bcol]);
    }
  }
  return fidelity(rho_, conjugated);
}

double CorrelatorSession::aggregate_r1(ChargedOp op) const {
  double sum = 0.0;
  for (int i = 1; i <= n_; ++i) {
    for (int j = 1; j <= n_; ++j) {
      if (i == j) continue;
      sum += r1(i, j, op);
    }
  }
  return sum / (static_cast<double>(n_) * (n_ - 1));
}

double correlator_C(const Matrix& rho, int i, int j, ChargedOp op) {
  return CorrelatorSession(rho).c(i, j, op);
}

double correlator_R1(const Matrix& rho, int i, int j, ChargedOp op) {
  return CorrelatorSession(rho).r1(i, j, op);
}

double correlator_R2(const Matrix& rho, int i, int j, ChargedOp op) {
  return CorrelatorSession(rho).r2(i, j, op);
}

double correlator_F(const Matrix& rho, int i, int j, ChargedOp op) {
  return CorrelatorSession(rho).f(i, j, op);
}

double aggregate_r1(const Matrix& rho, ChargedOp op) {
  return CorrelatorSession(rho).aggregate_r1(op);
}

std::pair<double, double> symmetry_residuals(const Matrix& rho,
                                             SymmetryKind symmetry) {
  if (rho.rows() != rho.cols()) {
    throw std::invalid_argument("symmetry_residuals: state must be square");
  }
  check_dim(rho.rows());
  const Index dim = rho.rows();
  const int n = qubits_from_dim(dim);

  if (symmetry == SymmetryKind::kZ2) {
    const Matrix p0 = z2_projector(n);
    const double strong = trace_norm(p0 * rho * p0 - rho);
    // Xbar conjugation is the index flip x -> ~x.
    const std::uint64_t all = (std::uint64_t{1} << n) - 1;
    Matrix flipped(dim, dim);
    for (Index x = 0; x < dim; ++x) {
      for (Index y = 0; y < dim; ++y) {
        flipped(static_cast<Index>(x ^ all), static_cast<Index>(y ^ all)) =
            rho(x, y);
      }
    }
    const double weak = trace_norm(flipped - rho);
    return {strong, weak};
  }

  // U(1): project onto the charge sector carrying the most weight.
  std::vector<double> sector_mass(n + 1, 0.0);
  for (Index x = 0; x < dim; ++x) {
    sector_mass[hamming_weight(static_cast<std::uint64_t>(x))] +=
        std::max(0.0, rho(x, x).real());
  }
  int best_q = 0;
  for (int q = 1; q <= n; ++q) {
    if (sector_mass[q] > sector_mass[best_q]) best_q = q;
  }
  Matrix projected = Matrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    if (hamming_weight(static_cast<std::uint64_t>(x)) != best_q) continue;
    for (Index y = 0; y < dim; ++y) {
      if (hamming_weight(static_cast<std::uint64_t>(y)) != best_q) continue;
      projected(x, y) = rho(x, y);
    }
  }
  const double strong = trace_norm(projected - rho);

  const double theta = 2.0 * std::numbers::pi / static_cast<double>(dim);
  Matrix rotated(dim, dim);
  for (Index x = 0; x < dim; ++x) {
    const int wx = hamming_weight(static_cast<std::uint64_t>(x));
    for (Index y = 0; y < dim; ++y) {
      const int wy = hamming_weight(static_cast<std::uint64_t>(y));
      rotated(x, y) = std::polar(1.0, theta * (wx - wy)) * rho(x, y);
    }
  }
  const double weak = trace_norm(rotated - rho);
  return {strong, weak};
}

std::pair<double, double> swap_test_purity(const Matrix& rho, long shots,
                                           RandomStream& rng) {
  if (shots < 1) {
    throw std::invalid_argument("swap_test_purity: shots must be >= 1");
  }
  const double success_prob = 0.5 * (1.0 + purity(rho));
  long successes = 0;
  for (long s = 0; s < shots; ++s) {
    if (rng.bernoulli(success_prob)) ++successes;
  }
  const double p_hat = static_cast<double>(successes) / shots;
  const double estimate = 2.0 * p_hat - 1.0;
  const double stderr_est = 2.0 * std::sqrt(p_hat * (1.0 - p_hat) / shots);
  return {estimate, stderr_est};
}

}  // namespace swssb
