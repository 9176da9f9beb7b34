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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "swssb/diagnostics.hpp"
#include "swssb/weingarten.hpp"

namespace {

using swssb::EnsembleSpec;
using swssb::Index;
using swssb::Matrix;
using swssb::PreparationPath;
using swssb::SymmetryKind;
using swssb::UnitaryMode;

bool is_unitary(const Matrix& u, double tol = 1e-10) {
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()))
             .cwiseAbs()
             .maxCoeff() < tol;
}

void check_density_matrix(const Matrix& rho, double tol = 1e-10) {
  CHECK(swssb::is_hermitian(rho, tol));
  CHECK(std::abs(rho.trace().real() - 1.0) < tol);
  Eigen::VectorXd evals = swssb::hermitian_eigenvalues(rho);
  CHECK(evals.minCoeff() > -tol);
}

EnsembleSpec z2_spec(int n, long r, UnitaryMode mode, std::uint64_t seed) {
  EnsembleSpec spec;
  spec.N = n;
  spec.r = r;
  spec.symmetry = SymmetryKind::kZ2;
  spec.unitary_mode = mode;
  spec.seed = seed;
  return spec;
}

EnsembleSpec u1_spec(int n, int q, long r, UnitaryMode mode,
                     std::uint64_t seed) {
  EnsembleSpec spec;
  spec.N = n;
  spec.r = r;
  spec.symmetry = SymmetryKind::kU1;
  spec.Q = q;
  spec.unitary_mode = mode;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("ensemble specs are validated") {
  CHECK_NOTHROW(swssb::validate_ensemble_spec(
      z2_spec(4, 4, UnitaryMode::kHaar, 1)));
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      z2_spec(1, 1, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      z2_spec(13, 2, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      z2_spec(4, 3, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
  // Rank may not exceed the even-sector dimension 2^{N-1}.
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      z2_spec(4, 16, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
  CHECK_NOTHROW(swssb::validate_ensemble_spec(
      u1_spec(4, 2, 16, UnitaryMode::kHaar, 1)));
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      u1_spec(4, -1, 4, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(swssb::validate_ensemble_spec(
                      u1_spec(4, 5, 4, UnitaryMode::kHaar, 1)),
                  std::invalid_argument);
}

TEST_CASE("haar_unitary draws are unitary") {
  swssb::RandomStream rng(7);
  for (Index dim : {2, 5, 16}) {
    Matrix u = swssb::haar_unitary(dim, rng);
    REQUIRE(u.rows() == dim);
    CHECK(is_unitary(u));
  }
}

TEST_CASE("haar_isometry has orthonormal columns and uniform overlaps") {
  swssb::RandomStream rng(11);
  Matrix v = swssb::haar_isometry(8, 3, rng);
  REQUIRE(v.rows() == 8);
  REQUIRE(v.cols() == 3);
  CHECK((v.adjoint() * v - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK_THROWS_AS(swssb::haar_isometry(8, 9, rng), std::invalid_argument);
  CHECK_THROWS_AS(swssb::haar_isometry(8, 0, rng), std::invalid_argument);

  // E |v_00|^2 = 1/dim for a Haar column.
  const int n_draws = 4000;
  const Index dim = 8;
  double sum = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    Matrix w = swssb::haar_isometry(dim, 1, rng);
    sum += std::norm(w(0, 0));
  }
  double mean = sum / n_draws;
  // Var |v_00|^2 ~ 1/dim^2, so SE ~ 1/(dim sqrt(n)).
  CHECK(std::abs(mean - 1.0 / static_cast<double>(dim)) <
        5.0 / (static_cast<double>(dim) * std::sqrt(double(n_draws))));
}

TEST_CASE("keyed permutation map is a deterministic bijection") {
  const Index dim = 64;
  auto perm = swssb::keyed_permutation_map(dim, 0xABCDEF);
  REQUIRE(perm.size() == static_cast<std::size_t>(dim));
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  for (auto img : perm) {
    REQUIRE(img < dim);
    CHECK(!seen[img]);
    seen[img] = true;
  }
  auto again = swssb::keyed_permutation_map(dim, 0xABCDEF);
  CHECK(perm == again);
  auto other = swssb::keyed_permutation_map(dim, 0xABCDF0);
  CHECK(perm != other);
  CHECK_THROWS_AS(swssb::keyed_permutation_map(48, 1),
                  std::invalid_argument);
}

TEST_CASE("pfc unitaries are unitary and keyed draws are reproducible") {
  swssb::RandomStream rng(99);
  for (int n : {1, 2, 3}) {
    Matrix u = swssb::pfc_unitary(n, rng);
    REQUIRE(u.rows() == (Index{1} << n));
    CHECK(is_unitary(u));
  }
  Matrix a = swssb::pfc_unitary_keyed(3, 0x1234);
  Matrix b = swssb::pfc_unitary_keyed(3, 0x1234);
  Matrix c = swssb::pfc_unitary_keyed(3, 0x1235);
  CHECK(is_unitary(a));
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);
  CHECK_THROWS_AS(swssb::pfc_unitary_keyed(9, 1), std::invalid_argument);
}

TEST_CASE("pfc draws reproduce degree-2 Haar moments") {
  // The Clifford layer makes the composite an exact 2-design, so the
  // Monte-Carlo twirl must converge to the Haar twirl.
  const Index d = 4;
  swssb::RandomStream rng(404);
  Matrix a(d, d), b(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      a(i, j) = swssb::Complex(rng.normal(), rng.normal());
      b(i, j) = swssb::Complex(rng.normal(), rng.normal());
    }
  Matrix exact = swssb::haar_twirl(swssb::kron(a, b), 2, d);

  const int n_draws = 4000;
  Matrix sum = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < n_draws; ++i) {
    Matrix u = swssb::pfc_unitary(2, rng);
    sum += swssb::kron(u * a * u.adjoint(), u * b * u.adjoint());
  }
  Matrix mc = sum / static_cast<double>(n_draws);
  CHECK((mc - exact).cwiseAbs().maxCoeff() < 0.15);
  CHECK((mc - exact).cwiseAbs().mean() < 0.03);
}

TEST_CASE("encoder circuit is a permutation intertwining X1 and Xbar") {
  for (int n : {2, 3, 4}) {
    Matrix enc = swssb::encoder_circuit(n);
    const Index dim = Index{1} << n;
    REQUIRE(enc.rows() == dim);
    CHECK(is_unitary(enc));
    for (Index j = 0; j < dim; ++j) {
      int ones = 0;
      for (Index i = 0; i < dim; ++i) {
        double re = enc(i, j).real();
        CHECK(std::abs(enc(i, j).imag()) == 0.0);
        CHECK((re == 0.0 || re == 1.0));
        if (re == 1.0) ++ones;
      }
      CHECK(ones == 1);
    }
    Matrix x1 = swssb::build_pauli({n, swssb::PauliKind::kSingleX, 1});
    Matrix xbar = swssb::build_pauli({n, swssb::PauliKind::kGlobalFlip, 1});
    CHECK((enc * x1 * enc.adjoint() - xbar).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("z2 states are flat rank-r densities with exact symmetry") {
  swssb::RandomStream rng(2026);
  for (auto mode :
       {UnitaryMode::kHaar, UnitaryMode::kClifford, UnitaryMode::kPfc}) {
    for (long r : {1L, 2L, 4L}) {
      EnsembleSpec spec = z2_spec(4, r, mode, 55);
      auto state = swssb::prepare_z2_state(spec, rng,
                                           PreparationPath::kFormula);
      check_density_matrix(state.rho);
      CHECK(std::abs(swssb::purity(state.rho) - 1.0 / double(r)) < 1e-10);
      auto [strong, weak] =
          swssb::symmetry_residuals(state.rho, SymmetryKind::kZ2);
      CHECK(strong < 1e-10);
      CHECK(weak < 1e-10);
      CHECK(state.acceptance_probability == 1.0);
    }
  }
}

TEST_CASE("formula and circuit preparations agree on the same unitary") {
  swssb::RandomStream rng(313);
  for (auto mode :
       {UnitaryMode::kHaar, UnitaryMode::kClifford, UnitaryMode::kPfc}) {
    EnsembleSpec spec = z2_spec(5, 4, mode, 77);
    Matrix u_sub = swssb::draw_unitary(spec.N - 1, spec, rng);
    auto formula = swssb::prepare_z2_state_from(spec, u_sub,
                                                PreparationPath::kFormula);
    auto circuit = swssb::prepare_z2_state_from(spec, u_sub,
                                                PreparationPath::kCircuit);
    CHECK((formula.rho - circuit.rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identically seeded streams reproduce the same z2 draw") {
  for (auto mode :
       {UnitaryMode::kHaar, UnitaryMode::kClifford, UnitaryMode::kPfc}) {
    EnsembleSpec spec = z2_spec(4, 2, mode, 99);
    swssb::RandomStream rng_a(42), rng_b(42), rng_c(43);
    auto a = swssb::prepare_z2_state(spec, rng_a, PreparationPath::kFormula);
    auto b = swssb::prepare_z2_state(spec, rng_b, PreparationPath::kFormula);
    auto c = swssb::prepare_z2_state(spec, rng_c, PreparationPath::kFormula);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.rho - c.rho).cwiseAbs().maxCoeff() > 1e-8);
  }
}

TEST_CASE("rank-deficient draws that stall the default eigensolver still "
          "decompose") {
  // This keyed draw produces a 256x256 rank-4 state whose zero-eigenvalue
  // cluster makes Eigen's tridiagonal QL iteration report NoConvergence;
  // the Schur fallback in the spectral helpers must cover it.
  EnsembleSpec spec = z2_spec(8, 4, UnitaryMode::kHaar, 20260818);
  const std::uint64_t block = swssb::keyed_hash(20260818ull, 0xD1, 0);
  swssb::RandomStream rng(swssb::mix_seed(block, 17));
  auto st = swssb::prepare_z2_state(spec, rng, PreparationPath::kFormula);

  Matrix root = swssb::matrix_sqrt_psd(st.rho);
  CHECK((root * root - st.rho).cwiseAbs().maxCoeff() < 1e-12);

  auto eig = swssb::hermitian_eig(st.rho);
  CHECK(std::abs(eig.eigenvalues.sum() - 1.0) < 1e-10);
  CHECK(std::is_sorted(eig.eigenvalues.begin(), eig.eigenvalues.end()));
  Matrix recon = eig.eigenvectors * eig.eigenvalues.asDiagonal() *
                 eig.eigenvectors.adjoint();
  CHECK((recon - st.rho).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(swssb::is_psd(st.rho, 1e-10));
}

TEST_CASE("charge measurement samples the diagonal charge distribution") {
  const int n = 4;
  const Index dim = 16;
  // Maximally mixed state: P(Q) = C(N, Q) / 2^N = {1,4,6,4,1}/16.
  Matrix sigma = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  swssb::RandomStream rng(606);
  const int n_draws = 4000;
  std::vector<int> counts(n + 1, 0);
  for (int i = 0; i < n_draws; ++i) {
    auto m = swssb::charge_measurement(sigma, rng);
    REQUIRE(m.charge >= 0);
    REQUIRE(m.charge <= n);
    ++counts[static_cast<std::size_t>(m.charge)];
    if (i == 0) {
      check_density_matrix(m.post_state);
      // The projected state is supported on the sampled charge sector.
      Matrix p = swssb::u1_projector(n, m.charge);
      CHECK((p * m.post_state * p - m.post_state).cwiseAbs().maxCoeff() <
            1e-12);
      CHECK(std::abs(m.probability -
                     swssb::u1_sector(n, m.charge).dim_sector /
                         static_cast<double>(dim)) < 1e-12);
    }
  }
  const double expected[] = {1.0, 4.0, 6.0, 4.0, 1.0};
  for (int q = 0; q <= n; ++q) {
    double mean_count = n_draws * expected[q] / 16.0;
    double sd = std::sqrt(mean_count * (1.0 - expected[q] / 16.0));
    CHECK(std::abs(counts[static_cast<std::size_t>(q)] - mean_count) <
          5.0 * sd);
  }
}

TEST_CASE("u1 states live in the charge sector with positive acceptance") {
  swssb::RandomStream rng(515);
  for (auto mode :
       {UnitaryMode::kHaar, UnitaryMode::kClifford, UnitaryMode::kPfc}) {
    EnsembleSpec spec = u1_spec(4, 2, 4, mode, 31);
    auto state = swssb::prepare_u1_state(spec, rng);
    check_density_matrix(state.rho);
    CHECK(state.acceptance_probability > 0.0);
    CHECK(state.acceptance_probability <= 1.0 + 1e-12);
    Matrix p = swssb::u1_projector(spec.N, spec.Q);
    CHECK((p * state.rho * p - state.rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sampled postselection reaches the projected state") {
  EnsembleSpec spec = u1_spec(4, 2, 4, UnitaryMode::kHaar, 8);
  swssb::RandomStream rng_a(77), rng_b(77);
  auto projected = swssb::prepare_u1_state(spec, rng_a, false);
  auto sampled = swssb::prepare_u1_state(spec, rng_b, true);
  // Both paths draw the same unitary from identical stream prefixes and
  // condition on the same charge, so the states coincide exactly.
  CHECK((projected.rho - sampled.rho).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(projected.acceptance_probability -
                 sampled.acceptance_probability) < 1e-15);
}

TEST_CASE("sector and full-space u1 preparations agree") {
  for (auto mode : {UnitaryMode::kClifford, UnitaryMode::kPfc}) {
    EnsembleSpec spec = u1_spec(5, 2, 4, mode, 12);
    swssb::RandomStream rng_full(9), rng_sec(9);
    auto full = swssb::prepare_u1_state(spec, rng_full);
    auto sector = swssb::prepare_u1_sector_state(spec, rng_sec);
    REQUIRE(sector.sector.has_value());
    Matrix v = swssb::sector_isometry(*sector.sector);
    Matrix embedded = v * sector.rho * v.adjoint();
    CHECK((embedded - full.rho).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(sector.acceptance_probability -
                   full.acceptance_probability) < 1e-11);
  }
  // Haar mode draws a smaller block, so only the invariants are shared.
  EnsembleSpec spec = u1_spec(5, 2, 4, UnitaryMode::kHaar, 12);
  swssb::RandomStream rng(10);
  auto sector = swssb::prepare_u1_sector_state(spec, rng);
  REQUIRE(sector.sector.has_value());
  CHECK(std::abs(sector.rho.trace().real() - 1.0) < 1e-10);
  CHECK(sector.rho.rows() == sector.sector->dim_sector);
}

TEST_CASE("reference states take their closed forms") {
  const int n = 4;
  const Index dim = 16;
  Matrix rho0 = swssb::reference_state(SymmetryKind::kZ2, n);
  Matrix expected0 =
      (Matrix::Identity(dim, dim) +
       swssb::build_pauli({n, swssb::PauliKind::kGlobalFlip, 1})) /
      static_cast<double>(dim);
  CHECK((rho0 - expected0).cwiseAbs().maxCoeff() < 1e-14);
  check_density_matrix(rho0);

  Matrix rho_q = swssb::reference_state(SymmetryKind::kU1, n, 2);
  Matrix expected_q = swssb::u1_projector(n, 2) / 6.0;
  CHECK((rho_q - expected_q).cwiseAbs().maxCoeff() < 1e-14);
  check_density_matrix(rho_q);
  CHECK_THROWS_AS(swssb::reference_state(SymmetryKind::kU1, n, -1),
                  std::invalid_argument);
}
