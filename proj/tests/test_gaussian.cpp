// Copyright 2026 The cvcluster Authors
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cvcluster/gaussian.hpp"

using namespace cvcluster;
using Catch::Approx;

namespace {

// Single-mode squeezer on mode k of m modes: Q -> e^{-s} Q, P -> e^{s} P.
Matrix squeezer(std::size_t m, std::size_t k, double s) {
  Matrix out = Matrix::Identity(2 * m, 2 * m);
  out(k, k) = std::exp(-s);
  out(m + k, m + k) = std::exp(s);
  return out;
}

// Beam splitter rotating modes j, k by angle t in both quadratures.
Matrix beam_splitter(std::size_t m, std::size_t j, std::size_t k, double t) {
  Matrix out = Matrix::Identity(2 * m, 2 * m);
  for (const std::size_t off : {std::size_t{0}, m}) {
    out(off + j, off + j) = std::cos(t);
    out(off + k, off + k) = std::cos(t);
    out(off + j, off + k) = std::sin(t);
    out(off + k, off + j) = -std::sin(t);
  }
  return out;
}

// Two-mode squeezed vacuum with squeezing r.
CovarianceMatrix two_mode_squeezed(double r) {
  const double c = 0.5 * std::cosh(2 * r);
  const double s = 0.5 * std::sinh(2 * r);
  Matrix v = Matrix::Zero(4, 4);
  v(0, 0) = v(1, 1) = v(2, 2) = v(3, 3) = c;
  v(0, 1) = v(1, 0) = s;
  v(2, 3) = v(3, 2) = -s;
  return CovarianceMatrix(v);
}

Matrix random_symplectic(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  std::uniform_real_distribution<double> sq(-1.0, 1.0);
  Matrix s = Matrix::Identity(2 * m, 2 * m);
  for (int layer = 0; layer < 3; ++layer) {
    for (std::size_t k = 0; k < m; ++k) s = squeezer(m, k, sq(rng)) * s;
    for (std::size_t j = 0; j + 1 < m; ++j) s = beam_splitter(m, j, j + 1, angle(rng)) * s;
  }
  return s;
}

}  // namespace

TEST_CASE("symplectic form orders quadratures as (Q..., P...)", "[gaussian]") {
  const Matrix sigma = symplectic_form(2);
  CHECK(sigma(0, 2) == 1.0);
  CHECK(sigma(2, 0) == -1.0);
  CHECK(max_abs(sigma * sigma + Matrix::Identity(4, 4)) == 0.0);
  CHECK(quadrature_index(1, Quadrature::P, 3) == 4);
}

TEST_CASE("thermal state eigenvalues are n + 1/2", "[gaussian]") {
  for (const double n : {0.0, 0.3, 2.0, 40.0}) {
    for (const double nu : symplectic_eigenvalues(CovarianceMatrix::thermal(3, n))) CHECK(nu == Approx(n + 0.5).epsilon(1e-14));
  }
  CHECK(physicality_margin(CovarianceMatrix::vacuum(2)) == Approx(0.0).margin(1e-15));
}

TEST_CASE("symplectic maps preserve symplectic eigenvalues", "[gaussian][property]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 3);
    const SymplecticMatrix s(random_symplectic(m, rng));
    Vector diag(2 * m);
    for (std::size_t k = 0; k < m; ++k) diag(k) = diag(m + k) = 0.5 + 0.7 * static_cast<double>(k);
    const CovarianceMatrix v(diag.asDiagonal());
    const auto before = symplectic_eigenvalues(v);
    const auto after = symplectic_eigenvalues(apply_symplectic(v, s));
    REQUIRE(after.size() == before.size());
    for (std::size_t k = 0; k < m; ++k) CHECK(after[k] == Approx(before[k]).epsilon(1e-10));
    CHECK(is_physical(apply_symplectic(v, s)));
  }
}

TEST_CASE("strong squeezing keeps pure states at nu = 1/2", "[gaussian][property]") {
  for (const double s : {1.0, 4.0, 8.0}) {
    const SymplecticMatrix map(squeezer(2, 0, s) * beam_splitter(2, 0, 1, 0.4) * squeezer(2, 1, -s));
    const CovarianceMatrix v = apply_symplectic(CovarianceMatrix::vacuum(2), map);
    CHECK(physicality_margin(v) == Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("non-symplectic and malformed matrices are rejected", "[gaussian][errors]") {
  CHECK_THROWS_AS(SymplecticMatrix(2.0 * Matrix::Identity(4, 4)), InvalidArgument);
  CHECK_THROWS_AS(SymplecticMatrix(Matrix::Identity(3, 3)), InvalidDimension);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(CovarianceMatrix(asym), InvalidArgument);
  CHECK_THROWS_AS(CovarianceMatrix::thermal(2, -1.0), InvalidArgument);
  CHECK_THROWS_AS(apply_symplectic(CovarianceMatrix::vacuum(2), SymplecticMatrix::identity(3)), InvalidDimension);
}

TEST_CASE("sub-vacuum states are unphysical", "[gaussian]") {
  const CovarianceMatrix v(Matrix::Identity(2, 2) * 0.4);
  CHECK_FALSE(is_physical(v));
  CHECK(physicality_margin(v) == Approx(-0.1));
  CHECK_THROWS_AS(require_physical(v, 1e-6, "test"), UnphysicalState);
  CHECK_FALSE(is_physical(CovarianceMatrix(-Matrix::Identity(2, 2))));
}

TEST_CASE("log negativity of a two-mode squeezed vacuum is 2r", "[gaussian]") {
  for (const double r : {0.0, 0.25, 1.0, 2.5}) {
    CHECK(logarithmic_negativity(two_mode_squeezed(r)) == Approx(2 * r).margin(1e-12));
  }
  CHECK(logarithmic_negativity(CovarianceMatrix::thermal(2, 1.0)) == 0.0);
  CHECK_THROWS_AS(logarithmic_negativity(CovarianceMatrix::vacuum(3)), InvalidDimension);
}

TEST_CASE("homodyne on one half of a two-mode squeezed vacuum", "[gaussian]") {
  const double r = 0.8;
  const CovarianceMatrix v = two_mode_squeezed(r);
  const CovarianceMatrix q = measure_quadrature(v, 0, Quadrature::Q);
  REQUIRE(q.mode_count() == 1);
  CHECK(q(0, 0) == Approx(0.5 / std::cosh(2 * r)).epsilon(1e-12));
  CHECK(q(1, 1) == Approx(0.5 * std::cosh(2 * r)).epsilon(1e-12));
  const CovarianceMatrix p = measure_quadrature(v, 1, Quadrature::P);
  CHECK(p(0, 0) == Approx(0.5 * std::cosh(2 * r)).epsilon(1e-12));
  CHECK(p(1, 1) == Approx(0.5 / std::cosh(2 * r)).epsilon(1e-12));
  CHECK_THROWS_AS(measure_quadrature(v, 2, Quadrature::Q), InvalidArgument);
  CHECK_THROWS_AS(measure_quadrature(q, 0, Quadrature::Q), InvalidDimension);
}

TEST_CASE("measurement output stays physical", "[gaussian][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const CovarianceMatrix v = apply_symplectic(CovarianceMatrix::thermal(4, 0.2), SymplecticMatrix(random_symplectic(4, rng)));
    const CovarianceMatrix out = measure_quadrature(measure_quadrature(v, 1, Quadrature::P), 0, Quadrature::Q);
    CHECK(out.mode_count() == 2);
    CHECK(is_physical(out, 1e-9));
  }
}

TEST_CASE("pseudo-inverse of a rank-deficient matrix", "[gaussian]") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  const Matrix p = pseudo_inverse(m);
  CHECK(p(0, 0) == Approx(0.25));
  CHECK(p(1, 1) == 0.0);
  CHECK(max_abs(m * p * m - m) < 1e-15);
}

TEST_CASE("occupation and reduced states", "[gaussian]") {
  const CovarianceMatrix v = two_mode_squeezed(0.5);
  CHECK(mean_occupation(v, 0) == Approx(std::pow(std::sinh(0.5), 2)).epsilon(1e-12));
  const CovarianceMatrix one = reduced_state(v, {1});
  CHECK(one(0, 0) == Approx(0.5 * std::cosh(1.0)));
  CHECK(one(0, 1) == 0.0);
  CHECK_THROWS_AS(reduced_state(v, {2}), InvalidArgument);
}
