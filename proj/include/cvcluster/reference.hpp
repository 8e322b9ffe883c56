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

// Independent reference values used by the validation suite and the tests.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"

namespace cvcluster::reference {

/// Hand-expanded 6-mode blocks of the total map, in their printed scaling.
///
/// The printed blocks are exactly twice the symplectic S3 S2 S1 (their
/// S Sigma S^T is 4 Sigma), so `printed_total(r, alpha) / 2` is the
/// physical map. Both scalings are exposed since the validation suite reports
/// against each.
struct SymplecticBlocks {
  Matrix a;
  Matrix b;
  Matrix c;
  Matrix d;
};

inline SymplecticBlocks printed_blocks(double r, double alpha) {
  const Real ep = std::exp(Real(alpha));
  const Real em = std::exp(-Real(alpha));
  const Real cp = std::cosh(2.0L * r) * ep;
  const Real cm = std::cosh(2.0L * r) * em;
  const Real sp = std::sinh(2.0L * r) * ep;
  const Real sm = std::sinh(2.0L * r) * em;
  SymplecticBlocks s{Matrix(6, 6), Matrix(6, 6), Matrix(6, 6), Matrix(6, 6)};
  // clang-format off
  s.a << -cp,   0,   0, -ep, -sm,   0,
           0,  cp,  sm,  sm,  cp,   0,
           0, -sm,  ep,   0,   0, -cp,
          cp,   0,   0, -ep,  sm,   0,
           0, -cp,  sm, -sm,  cp,   0,
           0, -sm, -ep,   0,   0, -cp;
  s.b << -ep,  sm,   0, -cp,   0,   0,
         -sm,  cp,   0,   0,  cp, -sm,
           0,   0, -cp,   0,  sm,  ep,
         -ep, -sm,   0,  cp,   0,   0,
          sm,  cp,   0,   0, -cp, -sm,
           0,   0, -cp,   0,  sm, -ep;
  s.c <<  em,  sp,   0,  cm,   0,   0,
         -sp, -cm,   0,   0, -cm, -sp,
           0,   0,  cm,   0,  sp, -em,
          em, -sp,   0, -cm,   0,   0,
          sp, -cm,   0,   0,  cm, -sp,
           0,   0,  cm,   0,  sp,  em;
  s.d << -cm,   0,   0, -em,  sp,   0,
           0,  cm, -sp, -sp,  cm,   0,
           0,  sp,  em,   0,   0, -cm,
          cm,   0,   0, -em, -sp,   0,
           0, -cm, -sp,  sp,  cm,   0,
           0,  sp, -em,   0,   0, -cm;
  // clang-format on
  return s;
}

inline Matrix assemble(const SymplecticBlocks& s) {
  Matrix m(12, 12);
  m << s.a, s.b, s.c, s.d;
  return m;
}

inline Matrix printed_total(double r, double alpha) { return assemble(printed_blocks(r, alpha)); }

/// Graph of the six-mode cluster state (theta = pi/8).
inline Matrix six_mode_adjacency() {
  Matrix a(6, 6);
  // clang-format off
  a <<    0,  0.5,   0,    0, -0.5,   0,
        0.5,    0, 0.5, -0.5,    0, 0.5,
          0,  0.5,   0,    0,  0.5,   0,
          0, -0.5,   0,    0,  0.5,   0,
       -0.5,    0, 0.5,  0.5,    0, 0.5,
          0,  0.5,   0,    0,  0.5,   0;
  // clang-format on
  return a;
}

/// One-shot Gaussian conditioning: homodyne Q on `measure_q` and P on
/// `measure_p` (0-based modes) in a single Schur complement over all measured
/// quadratures. Returns the covariance of `keep`, in that order.
inline Matrix condition_all(const Matrix& v, const std::vector<std::size_t>& measure_q,
                            const std::vector<std::size_t>& measure_p, const std::vector<std::size_t>& keep) {
  const auto m = static_cast<std::size_t>(v.rows() / 2);
  std::vector<Eigen::Index> measured;
  for (const std::size_t k : measure_q) measured.push_back(static_cast<Eigen::Index>(k));
  for (const std::size_t k : measure_p) measured.push_back(static_cast<Eigen::Index>(m + k));
  std::vector<Eigen::Index> kept;
  for (const std::size_t k : keep) kept.push_back(static_cast<Eigen::Index>(k));
  for (const std::size_t k : keep) kept.push_back(static_cast<Eigen::Index>(m + k));
  for (const Eigen::Index i : measured) {
    if (i >= v.rows()) throw InvalidArgument("condition_all: mode out of range");
  }
  for (const Eigen::Index i : kept) {
    if (i >= v.rows()) throw InvalidArgument("condition_all: mode out of range");
  }
  const Matrix vxx = v(measured, measured);
  const Matrix vyx = v(kept, measured);
  Matrix out = v(kept, kept) - vyx * vxx.ldlt().solve(vyx.transpose());
  return 0.5 * (out + out.transpose());
}

}  // namespace cvcluster::reference
