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

// Covariance propagation under dV/dt = B V + V B^T + D through a pulse schedule.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/network.hpp"
#include "cvcluster/protocol.hpp"

namespace cvcluster {

/// Trajectory samples are checked against this physicality tolerance.
inline constexpr double kTrajectoryPhysicalityTol = 1e-6;

inline constexpr std::size_t kDefaultSamplesPerSegment = 50;

namespace detail {

inline void require_drift_shape(const Matrix& v, const DriftDiffusion& dd, const char* what) {
  if (dd.drift.rows() != v.rows() || dd.drift.cols() != v.cols() || dd.diffusion.rows() != v.rows() ||
      dd.diffusion.cols() != v.cols()) {
    throw InvalidDimension(std::string(what) + ": drift/diffusion do not match the covariance dimension");
  }
}

inline void require_finite_state(const Matrix& v, const std::string& context, double t) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << context << ": non-finite covariance at t = " << t << " (max finite entry "
        << v.unaryExpr([](double x) { return std::isfinite(x) ? std::abs(x) : 0.0; }).maxCoeff() << ")";
    throw NumericalFailure(msg.str());
  }
}

/// Exact one-step map V -> Phi V Phi^T + Q over a step h (Van Loan).
struct AffineStep {
  Matrix phi;
  Matrix noise;

  AffineStep(const DriftDiffusion& dd, double h) {
    const Eigen::Index d = dd.drift.rows();
    const Real step = h;
    Matrix m = Matrix::Zero(2 * d, 2 * d);
    m.topLeftCorner(d, d) = -dd.drift * step;
    m.topRightCorner(d, d) = dd.diffusion * step;
    m.bottomRightCorner(d, d) = dd.drift.transpose() * step;
    const Matrix e = m.exp();
    phi = e.bottomRightCorner(d, d).transpose();
    noise = phi * e.topRightCorner(d, d);
    noise = (0.5L * (noise + noise.transpose())).eval();
  }

  Matrix apply(const Matrix& v) const {
    const Matrix out = phi * v * phi.transpose() + noise;
    return 0.5L * (out + out.transpose());
  }

  bool finite() const { return phi.allFinite() && noise.allFinite(); }
};

}  // namespace detail

/// Exact solution over `duration`, sampled at `samples` equally spaced times
/// (the last sample is at `duration`). Each sample is propagated from `v`
/// directly rather than from the previous sample, so round-off does not
/// compound along the segment.
inline std::vector<CovarianceMatrix> evolve_segment(const CovarianceMatrix& v, const DriftDiffusion& dd,
                                                    double duration, std::size_t samples = 1,
                                                    const std::string& context = "evolve_segment") {
  detail::require_drift_shape(v.matrix(), dd, "evolve_segment");
  if (!(duration > 0.0)) throw InvalidArgument("evolve_segment: duration must be > 0");
  if (samples == 0) throw InvalidArgument("evolve_segment: need at least one sample");
  std::vector<CovarianceMatrix> out;
  out.reserve(samples);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = k == samples ? duration : duration * static_cast<double>(k) / static_cast<double>(samples);
    const detail::AffineStep step(dd, t);
    if (!step.finite()) throw NumericalFailure(context + ": non-finite propagator at t = " + std::to_string(t));
    Matrix next = step.apply(v.matrix());
    detail::require_finite_state(next, context, t);
    out.emplace_back(std::move(next));
  }
  return out;
}

/// Fixed-step classical RK4 on the Lyapunov equation; `step` is rounded down
/// so that it divides the duration. Integrates in double: this path is an
/// independent cross-check, not a production solver.
inline CovarianceMatrix evolve_segment_rk(const CovarianceMatrix& v, const DriftDiffusion& dd, double duration,
                                          double step) {
  detail::require_drift_shape(v.matrix(), dd, "evolve_segment_rk");
  if (duration == 0.0) return v;
  if (!(duration > 0.0) || !(step > 0.0)) throw InvalidArgument("evolve_segment_rk: duration and step must be > 0");
  if (step > duration / 100.0) throw InvalidArgument("evolve_segment_rk: step must be <= duration/100");
  const auto n = static_cast<std::size_t>(std::ceil(duration / step - 1e-9));
  const double h = duration / static_cast<double>(n);
  const Eigen::MatrixXd b = dd.drift.cast<double>();
  const Eigen::MatrixXd d = dd.diffusion.cast<double>();
  const auto rhs = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd bx = b * x;
    return bx + bx.transpose() + d;
  };
  Eigen::MatrixXd x = v.matrix().cast<double>();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::MatrixXd k1 = rhs(x);
    const Eigen::MatrixXd k2 = rhs(x + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = rhs(x + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const Matrix out = x.cast<Real>();
  detail::require_finite_state(out, "evolve_segment_rk", duration);
  return CovarianceMatrix(0.5L * (out + out.transpose()));
}

/// Mechanical modes thermal at `n_th_init`, cavities in vacuum.
inline CovarianceMatrix initial_network_state(const ModeLayout& layout, double n_th_init) {
  if (!(n_th_init >= 0.0)) throw InvalidArgument("initial_network_state: n_th_init must be >= 0");
  const auto d = static_cast<Eigen::Index>(layout.quadrature_dim());
  Vector diag = Vector::Constant(d, kVacuumVariance);
  for (const Eigen::Index i : layout.mechanical_quadratures()) diag(i) = n_th_init + kVacuumVariance;
  return CovarianceMatrix(diag.asDiagonal());
}

inline CovarianceMatrix mechanical_state(const CovarianceMatrix& full, const ModeLayout& layout) {
  if (full.dim() != layout.quadrature_dim()) throw InvalidDimension("mechanical_state: dimension mismatch");
  return CovarianceMatrix(mechanical_block(full.matrix(), layout));
}

/// Mean phonon number over the 2N mechanical modes.
inline double mean_phonon_number(const CovarianceMatrix& full, const ModeLayout& layout) {
  if (full.dim() != layout.quadrature_dim()) throw InvalidDimension("mean_phonon_number: dimension mismatch");
  double sum = 0.0;
  for (std::size_t m = 0; m < layout.mechanical_count(); ++m) {
    sum += mean_occupation(full, m, kTrajectoryPhysicalityTol);
  }
  return sum / static_cast<double>(layout.mechanical_count());
}

/// Average nullifier of the mechanical sector with respect to the schedule's target graph.
inline double average_nullifier(const CovarianceMatrix& full, const PulseSchedule& schedule) {
  return nullifier_statistics(mechanical_state(full, schedule.layout()), schedule.target_adjacency()).average;
}

struct TrajectorySample {
  double time;
  std::size_t segment;  ///< index into the schedule; the t = 0 sample reports 0
  CovarianceMatrix covariance;
  double average_nullifier;
  double phonon_number;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  const TrajectorySample& final() const {
    if (samples.empty()) throw InvalidArgument("Trajectory: empty");
    return samples.back();
  }
  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples) t.push_back(s.time);
    return t;
  }
};

/// Propagates the initial network state through every segment of `schedule`
/// with damping `spec`. Zero-duration segments are skipped; every sample is
/// checked for physicality.
inline Trajectory run_protocol(const PulseSchedule& schedule, const DampingSpec& spec, double n_th_init,
                               std::size_t samples_per_segment = kDefaultSamplesPerSegment) {
  spec.validate();
  const ModeLayout& layout = schedule.layout();
  if (!spec.mechanical_gamma.empty() && spec.mechanical_gamma.size() != layout.mechanical_count()) {
    throw InvalidDimension("run_protocol: per-mode gamma has " + std::to_string(spec.mechanical_gamma.size()) +
                           " entries, schedule has " + std::to_string(layout.mechanical_count()) +
                           " mechanical modes");
  }
  if (samples_per_segment == 0) throw InvalidArgument("run_protocol: need at least one sample per segment");
  const ChannelMatrix channels = channel_matrix(layout, spec);

  const auto observe = [&](double t, std::size_t seg, CovarianceMatrix v) {
    require_physical(v, kTrajectoryPhysicalityTol, "run_protocol at t = " + std::to_string(t));
    const double snu = average_nullifier(v, schedule);
    const double nph = mean_phonon_number(v, layout);
    return TrajectorySample{t, seg, std::move(v), snu, nph};
  };

  Trajectory traj;
  traj.samples.push_back(observe(0.0, 0, initial_network_state(layout, n_th_init)));
  double t0 = 0.0;
  for (std::size_t k = 0; k < schedule.segments().size(); ++k) {
    const PulseSegment& seg = schedule.segments()[k];
    if (seg.duration == 0.0) continue;
    const DriftDiffusion dd = drift_diffusion(seg.generator, channels);
    const auto states = evolve_segment(traj.samples.back().covariance, dd, seg.duration, samples_per_segment,
                                       "segment " + std::to_string(k) + " [" + seg.generator.label() + "]");
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double t = t0 + seg.duration * static_cast<double>(i + 1) / static_cast<double>(states.size());
      traj.samples.push_back(observe(t, k, states[i]));
    }
    t0 += seg.duration;
  }
  return traj;
}

/// Final covariance of the schedule without intermediate sampling or observables.
inline CovarianceMatrix propagate_final(const PulseSchedule& schedule, const DampingSpec& spec, double n_th_init) {
  spec.validate();
  const ChannelMatrix channels = channel_matrix(schedule.layout(), spec);
  CovarianceMatrix v = initial_network_state(schedule.layout(), n_th_init);
  for (std::size_t k = 0; k < schedule.segments().size(); ++k) {
    const PulseSegment& seg = schedule.segments()[k];
    if (seg.duration == 0.0) continue;
    v = evolve_segment(v, drift_diffusion(seg.generator, channels), seg.duration, 1,
                       "segment " + std::to_string(k) + " [" + seg.generator.label() + "]")
            .back();
  }
  return v;
}

/// Same as propagate_final but integrated with RK4 at `step`.
inline CovarianceMatrix propagate_final_rk(const PulseSchedule& schedule, const DampingSpec& spec, double n_th_init,
                                           double step) {
  spec.validate();
  const ChannelMatrix channels = channel_matrix(schedule.layout(), spec);
  CovarianceMatrix v = initial_network_state(schedule.layout(), n_th_init);
  for (const PulseSegment& seg : schedule.segments()) {
    if (seg.duration == 0.0) continue;
    v = evolve_segment_rk(v, drift_diffusion(seg.generator, channels), seg.duration,
                          std::min(step, seg.duration / 100.0));
  }
  return v;
}

}  // namespace cvcluster
