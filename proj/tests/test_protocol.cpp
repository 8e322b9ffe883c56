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
#include <numbers>
#include <random>
#include <vector>

#include "cvcluster/protocol.hpp"
#include "cvcluster/reference.hpp"

using namespace cvcluster;
using Catch::Approx;

namespace {

bool symplectic_to(const Matrix& s, double tol) {
  const Matrix sigma = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
  const double scale = std::max(1.0, max_abs(s) * max_abs(s));
  return max_abs(s * sigma * s.transpose() - sigma) <= tol * scale;
}

}  // namespace

TEST_CASE("every step map is symplectic", "[protocol][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      const double alpha = dist(rng);
      const double r = dist(rng);
      const double theta = dist(rng);
      CHECK(symplectic_to(step1_symplectic(n, alpha).matrix(), 1e-14));
      CHECK(symplectic_to(step2_symplectic(n, r).matrix(), 1e-14));
      CHECK(symplectic_to(step3_symplectic(n, theta).matrix(), 1e-14));
      CHECK(symplectic_to(total_symplectic(n, alpha, r, theta).matrix(), 1e-14));
    }
  }
}

TEST_CASE("six-mode map equals half the printed blocks", "[protocol]") {
  for (const auto& [r, alpha] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.3, 1.1}, {1.5, 1.0}, {1.2, 0.2}}) {
    const SymplecticMatrix s = total_symplectic(3, alpha, r);
    const reference::SymplecticBlocks printed = reference::printed_blocks(r, alpha);
    CHECK(max_abs(s.block_a() - 0.5L * printed.a) < 1e-12);
    CHECK(max_abs(s.block_b() - 0.5L * printed.b) < 1e-12);
    CHECK(max_abs(s.block_c() - 0.5L * printed.c) < 1e-12);
    CHECK(max_abs(s.block_d() - 0.5L * printed.d) < 1e-12);
  }
}

TEST_CASE("printed blocks are not symplectic at face value", "[protocol]") {
  const Matrix printed = reference::printed_total(0.4, 0.7);
  const Matrix sigma = symplectic_form(6);
  CHECK(max_abs(printed * sigma * printed.transpose() - 4.0L * sigma) < 1e-12);
  CHECK_FALSE(symplectic_to(printed, 1e-6));
}

TEST_CASE("six-mode adjacency has half-weight edges", "[protocol]") {
  const AdjacencyExtraction ex = extract_adjacency(stage_symplectic(3, kProbeSqueezing, kProbeSqueezing,
                                                                    kDefaultTheta, ProtocolStage::AfterStep3));
  CHECK(max_abs(ex.adjacency.matrix() - reference::six_mode_adjacency()) == 0.0);
  CHECK(ex.route_disagreement <= 1e-6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double w = ex.adjacency(i, j);
      CHECK((w == 0.0 || std::abs(w) == 0.5));
    }
  }
  CHECK(ex.adjacency.edges().size() == 8);
}

TEST_CASE("adjacency of larger networks is a graph", "[protocol][property]") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const AdjacencyMatrix a = probe_adjacency(n);
    CHECK(a.size() == 2 * n);
    CHECK(a.matrix() == a.matrix().transpose());
    CHECK(a.matrix().diagonal().cwiseAbs().maxCoeff() == 0.0);
    // Every vertex is connected.
    for (Eigen::Index i = 0; i < a.matrix().rows(); ++i) CHECK(a.matrix().row(i).cwiseAbs().sum() > 0.0);
  }
}

TEST_CASE("adjacency construction rejects non-graphs", "[protocol][errors]") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 0.5;
  CHECK_THROWS_AS(AdjacencyMatrix(m), InvalidArgument);
  m(1, 0) = 0.5;
  m(0, 0) = 1.0;
  CHECK_THROWS_AS(AdjacencyMatrix(m), InvalidArgument);
  CHECK_THROWS_AS(extract_adjacency(SymplecticMatrix::identity(3)), NumericalFailure);
}

TEST_CASE("unsqueezed protocol leaves vacuum nullifiers", "[protocol]") {
  // For vacuum input and no squeezing the map is orthogonal, so C_N = (A A^T + I) / 2.
  const AdjacencyMatrix a = probe_adjacency(3);
  const NullifierSet set = nullifier_covariance(total_symplectic(3, 0.0, 0.0), a);
  const Matrix expected = 0.5L * (a.matrix() * a.matrix().transpose() + Matrix::Identity(6, 6));
  CHECK(max_abs(set.covariance - expected) < 1e-14);
  CHECK(set.average == Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(analytic_average_nullifier(0.0, 0.0) == Approx(5.0 / 6.0));
  const NullifierSet direct = nullifier_statistics(CovarianceMatrix::vacuum(6), a);
  CHECK(max_abs(direct.covariance - expected) < 1e-15);
}

TEST_CASE("numerical average nullifier matches the closed form", "[protocol]") {
  const AdjacencyMatrix a = probe_adjacency(3);
  for (const double r : {0.0, 0.5, 1.5, 3.0}) {
    for (const double alpha : {0.0, 1.0, 3.0}) {
      const double numeric = nullifier_covariance(total_symplectic(3, alpha, r), a).average;
      CHECK(numeric == Approx(analytic_average_nullifier(r, alpha)).epsilon(1e-9));
    }
  }
}

TEST_CASE("thermal input scales the nullifiers by 2 n_th + 1", "[protocol][property]") {
  const AdjacencyMatrix a = probe_adjacency(3);
  const SymplecticMatrix s = total_symplectic(3, 0.8, 0.6);
  const double zero = nullifier_covariance(s, a, 0.0).average;
  for (const double n_th : {0.5, 2.0, 7.0}) {
    CHECK(nullifier_covariance(s, a, n_th).average == Approx(zero * (2 * n_th + 1)).epsilon(1e-12));
  }
}

TEST_CASE("step-II pairs alternate between the bands", "[protocol]") {
  using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(step2_pairs(2) == Pairs{{1, 2}});
  CHECK(step2_pairs(3) == Pairs{{1, 2}, {5, 6}});
  CHECK(step2_pairs(4) == Pairs{{1, 2}, {6, 7}, {3, 4}});
  CHECK(step2_site(4, 6) == 2);
}

TEST_CASE("pulse schedule layout and timing", "[protocol]") {
  ProtocolParameters p;
  p.alpha = 0.7;
  p.r = 1.1;
  const PulseSchedule s = build_schedule(p, 2.0);
  REQUIRE(s.segments().size() == 7);
  const double pi = std::numbers::pi;
  CHECK(s.markers().tau1 == Approx(5 * pi / 4 + 0.7));
  CHECK(s.markers().tau2 == Approx(s.markers().tau1 + pi));
  CHECK(s.markers().tau3 == Approx(s.markers().tau1 + 2 * pi));
  CHECK(s.total_duration() == Approx(s.markers().tau3 + 2.0));
  CHECK(s.segments().back().step == ProtocolStep::Extension);
  for (const PulseSegment& seg : s.segments()) CHECK(seg.generator.supported_on(s.layout()));
  CHECK_THROWS_AS(build_schedule(ProtocolParameters{3, -1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(build_schedule(p, -1.0), InvalidArgument);
}

TEST_CASE("pulsed propagation reproduces the closed form and restores the cavities", "[protocol]") {
  for (std::size_t n = 2; n <= 5; ++n) {
    ProtocolParameters p;
    p.resonators = n;
    p.alpha = 0.9;
    p.r = 0.6;
    const PulseSchedule s = build_schedule(p);
    const Matrix full = pulsed_propagator(s);
    CHECK(max_abs(mechanical_block(full, s.layout()) - total_symplectic(p).matrix()) < 1e-9);
    const auto cav = s.layout().cavity_quadratures();
    const auto mech = s.layout().mechanical_quadratures();
    const Matrix cc = full(cav, cav);
    const Matrix cm = full(cav, mech);
    // Each cavity ends up at +-identity and decoupled from the mechanics.
    CHECK(max_abs(cc.cwiseAbs() - Matrix::Identity(cc.rows(), cc.cols())) < 1e-9);
    CHECK(max_abs(cm) < 1e-9);
  }
}

TEST_CASE("beam-splitter angle changes the graph weights", "[protocol]") {
  const SymplecticMatrix s = stage_symplectic(3, kProbeSqueezing, kProbeSqueezing, 0.3, ProtocolStage::AfterStep3);
  const AdjacencyMatrix a = adjacency_from_symplectic(s);
  CHECK(a.matrix() == a.matrix().transpose());
  CHECK(max_abs(a.matrix() - reference::six_mode_adjacency()) > 0.01);
}
