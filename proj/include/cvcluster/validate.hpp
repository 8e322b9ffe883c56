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

// Built-in verification suite behind `cvcluster validate`.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/analysis.hpp"
#include "cvcluster/dynamics.hpp"
#include "cvcluster/protocol.hpp"
#include "cvcluster/reference.hpp"

namespace cvcluster {

struct CheckResult {
  std::string name;
  bool passed;
  double residual;
  double tolerance;
  std::string detail;
};

struct ValidationOptions {
  /// Applied to every pulse schedule the suite builds; used to inject faults.
  std::function<void(PulseSchedule&)> mutate_schedule;
};

/// Flips the sign of the two-mode-squeezing drive inside the Step-II
/// generator (a fault fixture for the suite itself). Negating the whole
/// generator would not do: the cavity-mediated map is even in the coupling.
inline void flip_step2_sign(PulseSchedule& schedule) {
  const ProtocolParameters& p = schedule.parameters();
  const std::size_t n = p.resonators;
  for (PulseSegment& seg : schedule.mutable_segments()) {
    if (seg.step != ProtocolStep::StepII) continue;
    Matrix g = Matrix::Zero(seg.generator.dim(), seg.generator.dim());
    for (const auto& [red, blue] : step2_pairs(n)) {
      g += generator_step2(schedule.layout(), step2_site(n, red), red, blue, p.g0, -p.r).matrix();
    }
    seg.generator = GeneratorMatrix(std::move(g), seg.generator.label() + " (squeeze sign flipped)");
  }
}

/// Fixed pseudo-random (r, alpha) pairs in [0, 1.5]^2.
inline std::vector<std::pair<double, double>> sample_squeezing_pairs(std::size_t count, std::uint64_t seed = 20260) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.5);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = dist(rng);
    const double alpha = dist(rng);
    out.emplace_back(r, alpha);
  }
  return out;
}

namespace detail {

inline std::string format_number(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

inline PulseSchedule checked_schedule(const ProtocolParameters& p, const ValidationOptions& opt) {
  PulseSchedule schedule = build_schedule(p);
  if (opt.mutate_schedule) opt.mutate_schedule(schedule);
  return schedule;
}

inline CheckResult make_check(std::string name, double residual, double tol, std::string detail) {
  return {std::move(name), residual <= tol, residual, tol, std::move(detail)};
}

}  // namespace detail

/// Largest |printed/2 - total_symplectic| over `pairs`.
inline double printed_blocks_residual(const std::vector<std::pair<double, double>>& pairs, Real scale) {
  double worst = 0.0;
  for (const auto& [r, alpha] : pairs) {
    const Matrix expected = reference::printed_total(r, alpha) * scale;
    worst = std::max(worst, max_abs(total_symplectic(3, alpha, r).matrix() - expected));
  }
  return worst;
}

/// Fits S_nu(numeric) = c * S_nu(closed form) over a grid on [0, 3]^2 and
/// returns (c, max relative deviation from the fit).
inline std::pair<double, double> nullifier_proportionality(std::size_t grid = 7) {
  const AdjacencyMatrix graph = probe_adjacency(3);
  std::vector<Real> ratios;
  for (const double r : linspace(0.0, 3.0, grid)) {
    for (const double alpha : linspace(0.0, 3.0, grid)) {
      const Real numeric = nullifier_covariance(total_symplectic(3, alpha, r), graph, 0.0).covariance.trace() / 6.0L;
      ratios.push_back(numeric / Real(analytic_average_nullifier(r, alpha)));
    }
  }
  Real c = 0.0L;
  for (const Real x : ratios) c += x;
  c /= static_cast<Real>(ratios.size());
  Real worst = 0.0L;
  for (const Real x : ratios) worst = std::max(worst, std::abs(x / c - 1.0L));
  return {static_cast<double>(c), static_cast<double>(worst)};
}

/// Runs every check; never throws for a failing check (only for broken inputs).
inline std::vector<CheckResult> run_validation(const ValidationOptions& opt = {}) {
  std::vector<CheckResult> out;
  const auto pairs = sample_squeezing_pairs(5);

  {
    const double half = printed_blocks_residual(pairs, 0.5L);
    const double full = printed_blocks_residual(pairs, 1.0L);
    out.push_back(detail::make_check("printed_blocks_closed_form", half, 1e-12,
                                     "against printed blocks / 2; unscaled residual " + detail::format_number(full)));
  }
  {
    double worst = 0.0;
    for (const auto& [r, alpha] : pairs) {
      ProtocolParameters p;
      p.alpha = alpha;
      p.r = r;
      const PulseSchedule schedule = detail::checked_schedule(p, opt);
      const Matrix mech = mechanical_block(pulsed_propagator(schedule), schedule.layout());
      worst = std::max(worst, max_abs(mech - 0.5L * reference::printed_total(r, alpha)));
    }
    out.push_back(detail::make_check("printed_blocks_pulsed", worst, 1e-9, "segment exponentials vs printed blocks / 2"));
  }
  {
    const AdjacencyExtraction ex = extract_adjacency(stage_symplectic(3, kProbeSqueezing, kProbeSqueezing,
                                                                      kDefaultTheta, ProtocolStage::AfterStep3));
    const double diff = max_abs(ex.adjacency.matrix() - reference::six_mode_adjacency());
    out.push_back(detail::make_check("adjacency_six_mode", std::max(diff, ex.route_disagreement), 1e-6,
                                     "route disagreement " + detail::format_number(ex.route_disagreement)));
  }
  {
    const auto [c, dev] = nullifier_proportionality();
    out.push_back(detail::make_check("average_nullifier_closed_form", dev, 1e-9, "c = " + detail::format_number(c)));
  }
  {
    double worst = 0.0;
    for (const auto& [r, alpha] : pairs) {
      ProtocolParameters p;
      p.alpha = alpha;
      p.r = r;
      const PulseSchedule schedule = detail::checked_schedule(p, opt);
      const CovarianceMatrix final = propagate_final(schedule, DampingSpec{}, kFigureThermal);
      const CovarianceMatrix expected =
          apply_symplectic(CovarianceMatrix::thermal(6, kFigureThermal), total_symplectic(3, alpha, r));
      const auto cav = schedule.layout().cavity_quadratures();
      const Matrix cavity = final.matrix()(cav, cav);
      worst = std::max({worst, max_abs(mechanical_block(final.matrix(), schedule.layout()) - expected.matrix()),
                        max_abs(cavity - Matrix::Identity(cavity.rows(), cavity.cols()) * kVacuumVariance)});
    }
    out.push_back(detail::make_check("pulsed_vs_closed_form", worst, 1e-9, "lossless propagation, n_th = 2 input"));
  }
  {
    ProtocolParameters p;
    p.alpha = 1.0;
    p.r = 1.5;
    const PulseSchedule schedule = detail::checked_schedule(p, opt);
    const DampingSpec spec{0.02, kFigureGamma, kFigureThermal, {}};
    const CovarianceMatrix exact = propagate_final(schedule, spec, kFigureThermal);
    const CovarianceMatrix rk = propagate_final_rk(schedule, spec, kFigureThermal, 1e-3);
    out.push_back(detail::make_check("integrator_cross_check", max_abs(exact.matrix() - rk.matrix()), 1e-8,
                                     "RK4 step 1e-3, kappa = 0.02"));
  }
  {
    PointParameters p;
    p.r = 1.5;
    p.alpha = 1.0;
    p.kappa = 0.02;
    p.gamma = kFigureGamma;
    p.n_th = kFigureThermal;
    const PointState st = evaluate_state(p, Model::Damped);
    const EntanglePlan plan(3);
    const EntanglementResult seq = entangle_distant(st.mechanical, plan);
    const auto zero_based = [](const std::vector<std::size_t>& labels) {
      std::vector<std::size_t> out;
      for (const std::size_t k : labels) out.push_back(k - 1);
      return out;
    };
    const Matrix oneshot = reference::condition_all(st.mechanical.matrix(), zero_based(plan.measure_q()),
                                                    zero_based(plan.measure_p()), zero_based(plan.keep()));
    out.push_back(detail::make_check("measurement_oracle", max_abs(seq.conditional.matrix() - oneshot), 1e-9,
                                     "E_N = " + detail::format_number(seq.log_negativity)));
  }
  return out;
}

}  // namespace cvcluster
