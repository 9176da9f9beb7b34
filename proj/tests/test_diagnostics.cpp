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
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "swssb/ensembles.hpp"

namespace {

using swssb::ChargedOp;
using swssb::CorrelatorSession;
using swssb::Index;
using swssb::Matrix;
using swssb::SymmetryKind;
using swssb::UnitaryMode;

Matrix pure_state(const Eigen::VectorXcd& psi) {
  return psi * psi.adjoint() / psi.squaredNorm();
}

}  // namespace

TEST_CASE("the symmetric mixture is invisible to every diagnostic") {
  const int n = 4;
  Matrix rho0 = swssb::reference_state(SymmetryKind::kZ2, n);
  CorrelatorSession session(rho0);
  REQUIRE(session.num_sites() == n);
  for (ChargedOp op : {ChargedOp::kZ, ChargedOp::kX}) {
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        CHECK(std::abs(session.c(i, j, op)) < 1e-12);
        CHECK(std::abs(session.r1(i, j, op) - 1.0) < 1e-9);
        CHECK(std::abs(session.r2(i, j, op) - 1.0) < 1e-9);
        CHECK(std::abs(session.f(i, j, op) - 1.0) < 1e-9);
      }
    }
    CHECK(std::abs(session.aggregate_r1(op) - 1.0) < 1e-9);
  }
}

TEST_CASE("the flat charge state has the closed-form hopping correlator") {
  const int n = 5, q = 2;
  const double expected =
      static_cast<double>(q) * (n - q) / (static_cast<double>(n) * (n - 1));
  Matrix rho_q = swssb::reference_state(SymmetryKind::kU1, n, q);
  CorrelatorSession full(rho_q);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      CHECK(std::abs(full.r1(i, j, ChargedOp::kSPlus) - expected) < 1e-10);
      CHECK(std::abs(full.c(i, j, ChargedOp::kSPlus)) < 1e-12);
    }
  }
  CHECK(std::abs(full.aggregate_r1(ChargedOp::kSPlus) - expected) < 1e-10);

  // Same numbers from the compact sector representation.
  swssb::SectorBasis basis = swssb::u1_sector(n, q);
  Matrix rho_sec =
      Matrix::Identity(basis.dim_sector, basis.dim_sector) /
      static_cast<double>(basis.dim_sector);
  CorrelatorSession sector(rho_sec, basis);
  CHECK(std::abs(sector.r1(1, 2, ChargedOp::kSPlus) - expected) < 1e-10);
  CHECK(std::abs(sector.aggregate_r1(ChargedOp::kSPlus) - expected) <
        1e-10);
}

TEST_CASE("sector and full-space sessions agree on charge-sector states") {
  swssb::EnsembleSpec spec;
  spec.N = 5;
  spec.Q = 2;
  spec.r = 4;
  spec.symmetry = SymmetryKind::kU1;
  spec.unitary_mode = UnitaryMode::kHaar;
  swssb::RandomStream rng(321);
  auto state = swssb::prepare_u1_sector_state(spec, rng);
  REQUIRE(state.sector.has_value());
  Matrix v = swssb::sector_isometry(*state.sector);
  Matrix full_rho = v * state.rho * v.adjoint();

  CorrelatorSession sector(state.rho, *state.sector);
  CorrelatorSession full(full_rho);
  for (ChargedOp op : {ChargedOp::kZ, ChargedOp::kX, ChargedOp::kSPlus}) {
    for (auto [i, j] : std::vector<std::pair<int, int>>{
             {1, 2}, {2, 5}, {4, 3}}) {
      // The hopping pair operator is non-Hermitian, so its expectation on
      // a generic draw is complex and c() refuses it by contract.
      if (op != ChargedOp::kSPlus) {
        CHECK(std::abs(sector.c(i, j, op) - full.c(i, j, op)) < 1e-9);
      }
      // r1 compares two independently eigendecomposed square roots.
      CHECK(std::abs(sector.r1(i, j, op) - full.r1(i, j, op)) < 5e-8);
      CHECK(std::abs(sector.r2(i, j, op) - full.r2(i, j, op)) < 1e-9);
    }
    CHECK(std::abs(sector.aggregate_r1(op) - full.aggregate_r1(op)) <
          5e-8);
  }
  // Z stays unitary on the sector; X leaks out of it.
  CHECK(std::abs(sector.f(1, 2, ChargedOp::kZ) -
                 full.f(1, 2, ChargedOp::kZ)) < 1e-9);
  CHECK_THROWS_AS(sector.f(1, 2, ChargedOp::kX), std::invalid_argument);
}

TEST_CASE("the non-unitary hopping operator has no fidelity diagnostic") {
  Matrix rho = swssb::reference_state(SymmetryKind::kU1, 3, 1);
  CorrelatorSession session(rho);
  CHECK_THROWS_AS(session.f(1, 2, ChargedOp::kSPlus),
                  std::invalid_argument);
  CHECK_THROWS_AS(session.c(0, 2, ChargedOp::kZ), std::invalid_argument);
  CHECK_THROWS_AS(session.c(1, 4, ChargedOp::kZ), std::invalid_argument);
  CHECK_THROWS_AS(session.c(2, 2, ChargedOp::kZ), std::invalid_argument);
}

TEST_CASE("flat-spectrum draws satisfy the moment identities") {
  swssb::EnsembleSpec spec;
  spec.N = 4;
  spec.r = 4;
  spec.symmetry = SymmetryKind::kZ2;
  spec.unitary_mode = UnitaryMode::kHaar;
  swssb::RandomStream rng(111);
  for (int rep = 0; rep < 5; ++rep) {
    auto state = swssb::prepare_z2_state(spec, rng,
                                         swssb::PreparationPath::kFormula);
    CorrelatorSession session(state.rho);
    for (ChargedOp op : {ChargedOp::kZ, ChargedOp::kX}) {
      double r1 = session.r1(1, 3, op);
      double r2 = session.r2(1, 3, op);
      double f = session.f(1, 3, op);
      // sqrt(rho) = sqrt(r) rho for a flat spectrum, so R1 = R2 exactly.
      CHECK(std::abs(r1 - r2) < 1e-8);
      CHECK(r1 <= f + 1e-8);
      CHECK(f <= std::sqrt(r1) + 1e-8);
    }
  }
}

TEST_CASE("bell-type pure states give the textbook correlators") {
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = 1.0;  // |00>
  phi(3) = 1.0;  // |11>
  CorrelatorSession bell(pure_state(phi));
  CHECK(std::abs(bell.c(1, 2, ChargedOp::kZ) - 1.0) < 1e-12);
  CHECK(std::abs(bell.c(1, 2, ChargedOp::kX) - 1.0) < 1e-12);
  CHECK(std::abs(bell.r1(1, 2, ChargedOp::kZ) - 1.0) < 1e-12);

  Eigen::VectorXcd fluid = Eigen::VectorXcd::Zero(4);
  fluid(1) = 1.0;  // |01>
  fluid(2) = 1.0;  // |10>
  CorrelatorSession hop(pure_state(fluid));
  CHECK(std::abs(hop.c(1, 2, ChargedOp::kSPlus) - 0.5) < 1e-12);
  CHECK(std::abs(hop.c(1, 2, ChargedOp::kZ) - (-1.0)) < 1e-12);

  Eigen::VectorXcd prod = Eigen::VectorXcd::Zero(4);
  prod(1) = 1.0;  // |01>
  CorrelatorSession product(pure_state(prod));
  CHECK(std::abs(product.c(1, 2, ChargedOp::kZ) - (-1.0)) < 1e-12);
  CHECK(std::abs(product.c(1, 2, ChargedOp::kSPlus)) < 1e-12);
}

TEST_CASE("symmetry residuals vanish exactly on the reference states") {
  auto [s0, w0] = swssb::symmetry_residuals(
      swssb::reference_state(SymmetryKind::kZ2, 4), SymmetryKind::kZ2);
  CHECK(s0 < 1e-12);
  CHECK(w0 < 1e-12);
  auto [sq, wq] = swssb::symmetry_residuals(
      swssb::reference_state(SymmetryKind::kU1, 4, 2), SymmetryKind::kU1);
  CHECK(sq < 1e-12);
  CHECK(wq < 1e-12);
}

TEST_CASE("symmetry residuals flag broken states") {
  const int n = 3;
  const Index dim = 8;
  // |000> breaks the flip symmetry strongly.
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(dim);
  zero(0) = 1.0;
  auto [s_broken, w_broken] =
      swssb::symmetry_residuals(pure_state(zero), SymmetryKind::kZ2);
  CHECK(s_broken > 0.1);
  CHECK(w_broken > 0.1);
  // A superposition across charge sectors breaks U(1) coherence.
  Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(dim);
  plus(0) = 1.0;  // weight 0
  plus(7) = 1.0;  // weight 3
  auto [s_u1, w_u1] =
      swssb::symmetry_residuals(pure_state(plus), SymmetryKind::kU1);
  CHECK(s_u1 > 0.1);
  CHECK(w_u1 > 0.1);
}

TEST_CASE("swap-test purity estimates are unbiased with honest errors") {
  Matrix rho = swssb::reference_state(SymmetryKind::kZ2, 3);  // purity 1/4
  swssb::RandomStream rng(2718);
  auto [est, se] = swssb::swap_test_purity(rho, 200000, rng);
  CHECK(se > 0.0);
  CHECK(se < 0.01);
  CHECK(std::abs(est - 0.25) < 5.0 * se);

  swssb::RandomStream rng_a(5), rng_b(5);
  auto [ea, sa] = swssb::swap_test_purity(rho, 1000, rng_a);
  auto [eb, sb] = swssb::swap_test_purity(rho, 1000, rng_b);
  CHECK(ea == eb);
  CHECK(sa == sb);
  CHECK_THROWS_AS(swssb::swap_test_purity(rho, 0, rng), std::invalid_argument);
}

TEST_CASE("one-shot wrappers match a dedicated session") {
  Matrix rho = swssb::reference_state(SymmetryKind::kU1, 4, 2);
  CorrelatorSession session(rho);
  CHECK(swssb::correlator_C(rho, 1, 3, ChargedOp::kSPlus) ==
        doctest::Approx(session.c(1, 3, ChargedOp::kSPlus)).epsilon(1e-12));
  CHECK(swssb::correlator_R1(rho, 1, 3, ChargedOp::kSPlus) ==
        doctest::Approx(session.r1(1, 3, ChargedOp::kSPlus)).epsilon(1e-12));
  CHECK(swssb::correlator_R2(rho, 1, 3, ChargedOp::kSPlus) ==
        doctest::Approx(session.r2(1, 3, ChargedOp::kSPlus)).epsilon(1e-12));
  CHECK(swssb::correlator_F(rho, 1, 3, ChargedOp::kZ) ==
        doctest::Approx(session.f(1, 3, ChargedOp::kZ)).epsilon(1e-12));
  CHECK(swssb::aggregate_r1(rho, ChargedOp::kSPlus) ==
        doctest::Approx(session.aggregate_r1(ChargedOp::kSPlus))
            .epsilon(1e-12));

  // The aggregate is the mean over ordered pairs.
  double manual = 0.0;
  int count = 0;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) {
      if (i == j) continue;
      manual += session.r1(i, j, ChargedOp::kSPlus);
      ++count;
    }
  CHECK(std::abs(session.aggregate_r1(ChargedOp::kSPlus) - manual / count) <
        1e-12);
}
