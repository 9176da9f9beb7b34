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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <doctest.h>

namespace {

using swssb::Complex;
using swssb::Matrix;
using swssb::PauliKind;
using swssb::PauliSpec;

Matrix pauli(int n, PauliKind kind, int site = 1) {
  return swssb::build_pauli(PauliSpec{n, kind, site});
}

}  // namespace

TEST_CASE("single-site Paulis use site 1 as the most significant bit") {
  Matrix z1 = pauli(2, PauliKind::kSingleZ, 1);
  CHECK(z1(0, 0).real() == doctest::Approx(1.0));
  CHECK(z1(1, 1).real() == doctest::Approx(1.0));
  CHECK(z1(2, 2).real() == doctest::Approx(-1.0));
  CHECK(z1(3, 3).real() == doctest::Approx(-1.0));

  Matrix z2 = pauli(2, PauliKind::kSingleZ, 2);
  CHECK(z2(1, 1).real() == doctest::Approx(-1.0));
  CHECK(z2(2, 2).real() == doctest::Approx(1.0));

  Matrix x2 = pauli(2, PauliKind::kSingleX, 2);
  CHECK(x2(0, 1).real() == doctest::Approx(1.0));
  CHECK(x2(2, 3).real() == doctest::Approx(1.0));
  CHECK(x2(0, 2).real() == doctest::Approx(0.0));
}

TEST_CASE("global flip is the full bit complement") {
  Matrix xbar = pauli(3, PauliKind::kGlobalFlip);
  for (int x = 0; x < 8; ++x)
    CHECK(xbar(7 - x, x).real() == doctest::Approx(1.0));
  CHECK(xbar.cwiseAbs().sum() == doctest::Approx(8.0));
  CHECK((Matrix(xbar * xbar) - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("raising and lowering operators obey the ladder algebra") {
  Matrix sp = pauli(1, PauliKind::kSPlus);
  CHECK(sp(0, 1).real() == doctest::Approx(1.0));  // |0><1|
  CHECK(sp.cwiseAbs().sum() == doctest::Approx(1.0));
  Matrix sm = pauli(1, PauliKind::kSMinus);
  CHECK((sm - Matrix(sp.adjoint())).cwiseAbs().maxCoeff() < 1e-15);

  // X_i = S_i^+ + S_i^- on a larger register.
  Matrix x = pauli(3, PauliKind::kSingleX, 2);
  Matrix sum = pauli(3, PauliKind::kSPlus, 2) + pauli(3, PauliKind::kSMinus, 2);
  CHECK((x - sum).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("charge operator counts set bits and generates rotations") {
  Matrix q = pauli(3, PauliKind::kCharge);
  CHECK(q(0, 0).real() == doctest::Approx(0.0));
  CHECK(q(5, 5).real() == doctest::Approx(2.0));  // 101
  CHECK(q(7, 7).real() == doctest::Approx(3.0));

  // The raising operator removes one unit of charge, so conjugating by the
  // charge rotation scales it by e^{-i theta}.
  const double theta = M_PI / 3.0;
  const int n = 3;
  Matrix rot = Matrix::Zero(8, 8);
  for (int x = 0; x < 8; ++x)
    rot(x, x) = std::polar(1.0, theta * swssb::hamming_weight(
                                            static_cast<std::uint64_t>(x)));
  Matrix sp = pauli(n, PauliKind::kSPlus, 2);
  Matrix conj = rot * sp * rot.adjoint();
  Matrix expected = std::polar(1.0, -theta) * sp;
  CHECK((conj - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("even-sector projector is idempotent and absorbs the flip") {
  for (int n : {2, 3, 4}) {
    Matrix p = swssb::z2_projector(n);
    swssb::Index dim = swssb::Index{1} << n;
    CHECK((Matrix(p * p) - p).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p - Matrix(p.adjoint())).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(p.trace().real() == doctest::Approx(static_cast<double>(dim) / 2));
    Matrix xbar = pauli(n, PauliKind::kGlobalFlip);
    CHECK((Matrix(p * xbar) - p).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("u1 sector enumerates weight-Q strings in numeric order") {
  swssb::SectorBasis basis = swssb::u1_sector(4, 2);
  CHECK(basis.dim_sector == 6);
  std::vector<std::uint64_t> expected = {3, 5, 6, 9, 10, 12};
  REQUIRE(basis.basis_index_map.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(basis.basis_index_map[i] == expected[i]);
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(basis.full_to_sector[static_cast<std::size_t>(expected[i])] ==
          static_cast<std::int32_t>(i));
  CHECK(basis.full_to_sector[0] == -1);
  CHECK(basis.full_to_sector[15] == -1);

  CHECK(swssb::u1_sector(4, 0).dim_sector == 1);
  CHECK(swssb::u1_sector(4, 4).dim_sector == 1);
  CHECK_THROWS_AS(swssb::u1_sector(4, 5), std::invalid_argument);
}

TEST_CASE("u1 projector and isometry cohere") {
  swssb::SectorBasis basis = swssb::u1_sector(5, 2);
  Matrix p = swssb::u1_projector(5, 2);
  CHECK(p.trace().real() == doctest::Approx(10.0));  // C(5,2)
  CHECK((Matrix(p * p) - p).cwiseAbs().maxCoeff() < 1e-15);
  Matrix v = swssb::sector_isometry(basis);
  CHECK((Matrix(v.adjoint() * v) -
         Matrix::Identity(basis.dim_sector, basis.dim_sector))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK((Matrix(v * v.adjoint()) - p).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("encoder permutation matches the CNOT staircase by hand") {
  // N = 2: the single gate CN_{1,2} flips bit 2 when bit 1 is set.
  std::vector<std::uint32_t> p2 = swssb::encoder_permutation(2);
  CHECK(p2[0] == 0);
  CHECK(p2[1] == 1);
  CHECK(p2[2] == 3);
  CHECK(p2[3] == 2);

  // N = 3: |100> -> CN12 -> |110> -> CN23 -> |111>.
  std::vector<std::uint32_t> p3 = swssb::encoder_permutation(3);
  CHECK(p3[4] == 7);
  CHECK(p3[0] == 0);
  // |010> has no control from site 1; CN23 copies bit 2 into bit 3.
  CHECK(p3[2] == 3);

  // Bijectivity.
  std::vector<bool> hit(8, false);
  for (std::uint32_t y : p3) hit[y] = true;
  for (bool h : hit) CHECK(h);
}

TEST_CASE("z2 sector basis spans the even sector through the encoder") {
  for (int n : {2, 3, 5}) {
    swssb::SectorBasis basis = swssb::z2_sector(n);
    swssb::Index half = swssb::Index{1} << (n - 1);
    CHECK(basis.dim_sector == half);
    Matrix v = swssb::sector_isometry(basis);
    CHECK((Matrix(v.adjoint() * v) - Matrix::Identity(half, half))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
    CHECK((Matrix(v * v.adjoint()) - swssb::z2_projector(n))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
    // Every basis column is a +1 eigenvector of the global flip.
    Matrix xbar = pauli(n, PauliKind::kGlobalFlip);
    CHECK((Matrix(xbar * v) - v).cwiseAbs().maxCoeff() < 1e-14);
    // Pair entries are bit complements of each other.
    for (const auto& pair : basis.basis_pair_map)
      CHECK((pair[0] ^ pair[1]) ==
            (static_cast<std::uint64_t>(1) << n) - 1);
  }
  CHECK_THROWS_AS(swssb::z2_sector(1), std::invalid_argument);
}

TEST_CASE("hamming_weight counts bits") {
  CHECK(swssb::hamming_weight(0) == 0);
  CHECK(swssb::hamming_weight(0b1011) == 3);
  CHECK(swssb::hamming_weight(~0ull) == 64);
}

TEST_CASE("build_pauli validates its inputs") {
  CHECK_THROWS_AS(pauli(0, PauliKind::kSingleZ), std::invalid_argument);
  CHECK_THROWS_AS(pauli(13, PauliKind::kSingleZ), std::invalid_argument);
  CHECK_THROWS_AS(pauli(3, PauliKind::kSingleZ, 0), std::invalid_argument);
  CHECK_THROWS_AS(pauli(3, PauliKind::kSingleZ, 4), std::invalid_argument);
}
