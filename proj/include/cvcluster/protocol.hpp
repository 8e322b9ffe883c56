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

// Three-step pulsed cluster-state protocol: closed-form symplectic maps on the
// 2N mechanical modes, adjacency extraction, nullifier statistics and the
// piecewise-constant pulse schedule on the full network.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/network.hpp"

namespace cvcluster {

inline constexpr double kDefaultTheta = std::numbers::pi / 8.0;

/// Squeezing used to approximate the infinite-squeezing limit in adjacency extraction.
inline constexpr double kProbeSqueezing = 20.0;

struct ProtocolParameters {
  std::size_t resonators = 3;
  double alpha = 0.0;  ///< Step-I single-mode squeezing
  double r = 0.0;      ///< Step-II two-mode squeezing
  double theta = kDefaultTheta;
  double g_i = 1.0;  ///< Step-I coupling
  double g0 = 1.0;   ///< Step-II/III coupling; sets the energy unit
};

namespace detail {

/// Quadrature indices in the 4N-dimensional mechanical sector (labels 1..2N).
struct MechanicalIndex {
  std::size_t n;
  Eigen::Index q(std::size_t label) const { return static_cast<Eigen::Index>(label - 1); }
  Eigen::Index p(std::size_t label) const { return static_cast<Eigen::Index>(2 * n + label - 1); }
};

inline void require_resonators(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    throw InvalidDimension(std::string(what) + ": need at least " + std::to_string(minimum) + " resonators");
  }
}

}  // namespace detail

/// Step I: diag(e^alpha I_2N, e^-alpha I_2N) U0, where U0 mixes Q_n with
/// P_{N+n} and Q_{N+n} with P_n at 45 degrees.
inline SymplecticMatrix step1_symplectic(std::size_t n, double alpha) {
  detail::require_resonators(n, 1, "step1_symplectic");
  if (!(alpha >= 0.0)) throw InvalidArgument("step1_symplectic: alpha must be >= 0");
  const detail::MechanicalIndex ix{n};
  const auto d = static_cast<Eigen::Index>(4 * n);
  Matrix u0 = Matrix::Zero(d, d);
  const Real h = 1.0L / std::sqrt(2.0L);
  for (std::size_t site = 1; site <= n; ++site) {
    const std::size_t up = site;
    const std::size_t low = n + site;
    u0(ix.q(up), ix.q(up)) = h;
    u0(ix.q(up), ix.p(low)) = h;
    u0(ix.q(low), ix.q(low)) = h;
    u0(ix.q(low), ix.p(up)) = h;
    u0(ix.p(up), ix.p(up)) = h;
    u0(ix.p(up), ix.q(low)) = -h;
    u0(ix.p(low), ix.p(low)) = h;
    u0(ix.p(low), ix.q(up)) = -h;
  }
  Vector scale(d);
  scale.head(d / 2).setConstant(std::exp(Real(alpha)));
  scale.tail(d / 2).setConstant(std::exp(-Real(alpha)));
  return SymplecticMatrix(scale.asDiagonal() * u0);
}

/// Mechanical pairs (red, blue) that Step II squeezes: upper (n, n+1) for odd n,
/// lower (N+n, N+n+1) for even n, open boundaries.
inline std::vector<std::pair<std::size_t, std::size_t>> step2_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t site = 1; site + 1 <= n; ++site) {
    if (site % 2 == 1) {
      pairs.emplace_back(site, site + 1);
    } else {
      pairs.emplace_back(n + site, n + site + 1);
    }
  }
  return pairs;
}

/// Site whose cavity mediates the Step-II pair starting at `red`.
inline std::size_t step2_site(std::size_t n, std::size_t red) { return red <= n ? red : red - n; }

/// Step II: per pair (a, b),
///   Q_a -> -c Q_a + s P_b,  P_b -> -s Q_a + c P_b,
///   Q_b ->  c Q_b - s P_a,  P_a ->  s Q_b - c P_a,
/// with c = cosh 2r, s = sinh 2r; identity on unpaired modes.
inline SymplecticMatrix step2_symplectic(std::size_t n, double r) {
  detail::require_resonators(n, 1, "step2_symplectic");
  if (!std::isfinite(r)) throw InvalidArgument("step2_symplectic: r must be finite");
  const detail::MechanicalIndex ix{n};
  const auto d = static_cast<Eigen::Index>(4 * n);
  Matrix s = Matrix::Identity(d, d);
  const Real ch = std::cosh(2.0L * r);
  const Real sh = std::sinh(2.0L * r);
  for (const auto& [a, b] : step2_pairs(n)) {
    for (const std::size_t label : {a, b}) {
      s(ix.q(label), ix.q(label)) = 0.0;
      s(ix.p(label), ix.p(label)) = 0.0;
    }
    s(ix.q(a), ix.q(a)) = -ch;
    s(ix.q(a), ix.p(b)) = sh;
    s(ix.p(b), ix.q(a)) = -sh;
    s(ix.p(b), ix.p(b)) = ch;
    s(ix.q(b), ix.q(b)) = ch;
    s(ix.q(b), ix.p(a)) = -sh;
    s(ix.p(a), ix.q(b)) = sh;
    s(ix.p(a), ix.p(a)) = -ch;
  }
  return SymplecticMatrix(std::move(s));
}

/// Step III: per pair (n, N+n) the block [[cos 2t, -sin 2t], [-sin 2t, -cos 2t]]
/// on both the Q and the P sector; theta = pi/8 is the 50:50 splitter.
inline SymplecticMatrix step3_symplectic(std::size_t n, double theta) {
  detail::require_resonators(n, 1, "step3_symplectic");
  if (!std::isfinite(theta)) throw InvalidArgument("step3_symplectic: theta must be finite");
  const detail::MechanicalIndex ix{n};
  const auto d = static_cast<Eigen::Index>(4 * n);
  Matrix s = Matrix::Zero(d, d);
  const Real c = std::cos(2.0L * theta);
  const Real sn = std::sin(2.0L * theta);
  for (std::size_t site = 1; site <= n; ++site) {
    const std::size_t up = site;
    const std::size_t low = n + site;
    for (const bool momentum : {false, true}) {
      const auto idx = [&](std::size_t label) { return momentum ? ix.p(label) : ix.q(label); };
      s(idx(up), idx(up)) = c;
      s(idx(up), idx(low)) = -sn;
      s(idx(low), idx(up)) = -sn;
      s(idx(low), idx(low)) = -c;
    }
  }
  return SymplecticMatrix(std::move(s));
}

/// S = S3 S2 S1 on the mechanical sector.
inline SymplecticMatrix total_symplectic(std::size_t n, double alpha, double r, double theta = kDefaultTheta) {
  return step3_symplectic(n, theta).after(step2_symplectic(n, r)).after(step1_symplectic(n, alpha));
}

inline SymplecticMatrix total_symplectic(const ProtocolParameters& p) {
  return total_symplectic(p.resonators, p.alpha, p.r, p.theta);
}

enum class ProtocolStage { AfterStep1, AfterStep2, AfterStep3 };

/// Closed-form mechanical symplectic at the end of `stage`.
inline SymplecticMatrix stage_symplectic(std::size_t n, double alpha, double r, double theta, ProtocolStage stage) {
  SymplecticMatrix s = step1_symplectic(n, alpha);
  if (stage == ProtocolStage::AfterStep1) return s;
  s = step2_symplectic(n, r).after(s);
  if (stage == ProtocolStage::AfterStep2) return s;
  return step3_symplectic(n, theta).after(s);
}

/// Symmetric, zero-diagonal graph weights of a CV cluster state.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(Matrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() == 0) throw InvalidDimension("AdjacencyMatrix: must be square");
    if (a_ != a_.transpose()) throw InvalidArgument("AdjacencyMatrix: must be symmetric");
    if (a_.diagonal().cwiseAbs().maxCoeff() != 0.0) throw InvalidArgument("AdjacencyMatrix: diagonal must be zero");
  }

  const Matrix& matrix() const noexcept { return a_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

  /// Weighted edges (i < j, 1-based labels).
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges() const {
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < a_.cols(); ++j) {
        if (a_(i, j) != 0.0) out.emplace_back(i + 1, j + 1, a_(i, j));
      }
    }
    return out;
  }

 private:
  Matrix a_;
};

struct AdjacencyOptions {
  double agreement_tol = 1e-6;  ///< allowed |S_C S_A^-1 - S_D S_B^-1|_max
  double snap_step = 0.25;
  double snap_tol = 1e-6;
};

/// Result of the two-route adjacency extraction, with diagnostics.
struct AdjacencyExtraction {
  AdjacencyMatrix adjacency;
  double route_disagreement;  ///< |S_C S_A^-1 - S_D S_B^-1|_max
  double snap_residual;       ///< largest distance moved by snapping
};

namespace detail {

/// c * b^-1. Partial pivoting is deliberate: at probe squeezing b is badly
/// conditioned but the product is well determined.
inline Matrix right_divide(const Matrix& c, const Matrix& b, const char* which) {
  const Eigen::PartialPivLU<Matrix> lu(b);
  if (lu.determinant() == 0.0) throw NumericalFailure(std::string("adjacency: ") + which + " is singular");
  Matrix x = c * lu.inverse();
  if (!x.allFinite()) throw NumericalFailure(std::string("adjacency: ") + which + " is singular");
  return x;
}

}  // namespace detail

/// Evaluates A = S_C S_A^-1 and S_D S_B^-1 on a symplectic taken at large
/// squeezing, checks that both routes agree and that the result is a graph
/// (symmetric, zero diagonal), then snaps near-multiples of `snap_step`.
inline AdjacencyExtraction extract_adjacency(const SymplecticMatrix& s, const AdjacencyOptions& opt = {}) {
  const Matrix a1 = detail::right_divide(s.block_c(), s.block_a(), "S_A");
  const Matrix a2 = detail::right_divide(s.block_d(), s.block_b(), "S_B");
  const double disagreement = max_abs(a1 - a2);
  if (!(disagreement <= opt.agreement_tol)) {
    throw NumericalFailure("adjacency: limit formulas disagree by " + std::to_string(disagreement));
  }
  // Entries close to the grid are snapped; off-grid weights (theta != pi/8)
  // are kept after symmetrization.
  Matrix snapped = 0.5 * (a1 + a1.transpose());
  double residual = 0.0;
  for (Eigen::Index i = 0; i < snapped.rows(); ++i) {
    for (Eigen::Index j = 0; j < snapped.cols(); ++j) {
      const double grid = std::round(snapped(i, j) / opt.snap_step) * opt.snap_step;
      const double dist = std::abs(snapped(i, j) - grid);
      if (dist <= opt.snap_tol) {
        residual = std::max(residual, dist);
        snapped(i, j) = grid == 0.0 ? 0.0 : grid;
      }
    }
  }
  const double asymmetry = max_abs(a1 - a1.transpose());
  if (asymmetry > opt.agreement_tol) {
    throw NumericalFailure("adjacency: extracted matrix is not symmetric (" + std::to_string(asymmetry) + ")");
  }
  if (snapped.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw NumericalFailure("adjacency: extracted matrix has a nonzero diagonal");
  }
  return {AdjacencyMatrix(std::move(snapped)), disagreement, residual};
}

inline AdjacencyMatrix adjacency_from_symplectic(const SymplecticMatrix& s, const AdjacencyOptions& opt = {}) {
  return extract_adjacency(s, opt).adjacency;
}

/// Adjacency after `stage`, probed at r = alpha = kProbeSqueezing.
inline AdjacencyMatrix probe_adjacency(std::size_t n, double theta = kDefaultTheta,
                                       ProtocolStage stage = ProtocolStage::AfterStep3) {
  return adjacency_from_symplectic(stage_symplectic(n, kProbeSqueezing, kProbeSqueezing, theta, stage));
}

/// Covariance of the nullifiers N = P - A Q.
struct NullifierSet {
  AdjacencyMatrix adjacency;
  Matrix covariance;  ///< C_N
  double average;     ///< S_nu = Tr[C_N] / 2N

  Vector variances() const { return covariance.diagonal(); }
};

/// C_N = (n_th + 1/2) C_d with
/// C_d = (S_C - A S_A)(S_C - A S_A)^T + (S_D - A S_B)(S_D - A S_B)^T.
inline NullifierSet nullifier_covariance(const SymplecticMatrix& s, const AdjacencyMatrix& a, double n_th = 0.0) {
  if (a.size() != s.mode_count()) {
    throw InvalidDimension("nullifier_covariance: adjacency has " + std::to_string(a.size()) +
                           " vertices, symplectic acts on " + std::to_string(s.mode_count()) + " modes");
  }
  if (!(n_th >= 0.0)) throw InvalidArgument("nullifier_covariance: n_th must be >= 0");
  const Matrix x = s.block_c() - a.matrix() * s.block_a();
  const Matrix y = s.block_d() - a.matrix() * s.block_b();
  Matrix cn = (n_th + kVacuumVariance) * (x * x.transpose() + y * y.transpose());
  cn = 0.5 * (cn + cn.transpose()).eval();
  const double avg = cn.trace() / static_cast<double>(cn.rows());
  return {a, std::move(cn), avg};
}

/// Nullifier covariance L V L^T, L = [-A, I], for an arbitrary mechanical state.
inline NullifierSet nullifier_statistics(const CovarianceMatrix& mechanical, const AdjacencyMatrix& a) {
  if (a.size() != mechanical.mode_count()) {
    throw InvalidDimension("nullifier_statistics: adjacency/covariance size mismatch");
  }
  const auto k = static_cast<Eigen::Index>(a.size());
  Matrix l(k, 2 * k);
  l.leftCols(k) = -a.matrix();
  l.rightCols(k).setIdentity();
  Matrix cn = l * mechanical.matrix() * l.transpose();
  cn = 0.5 * (cn + cn.transpose()).eval();
  const double avg = cn.trace() / static_cast<double>(k);
  return {a, std::move(cn), avg};
}

/// Closed-form six-mode average nullifier at n_th = 0:
/// (1/6) [2 e^{-(4r+2a)} + 2 e^{-(4r-2a)} + e^{-2a}].
inline double analytic_average_nullifier(double r, double alpha) {
  if (!(r >= 0.0) || !(alpha >= 0.0)) throw InvalidArgument("analytic_average_nullifier: r and alpha must be >= 0");
  return (2.0 * std::exp(-(4.0 * r + 2.0 * alpha)) + 2.0 * std::exp(-(4.0 * r - 2.0 * alpha)) +
          std::exp(-2.0 * alpha)) /
         6.0;
}

/// exp(Sigma G t): the lossless propagator of a constant generator.
inline Matrix hamiltonian_propagator(const GeneratorMatrix& g, double t) {
  const Matrix sigma = symplectic_form(g.dim() / 2);
  const Matrix arg = (sigma * g.matrix() * t).eval();
  return arg.exp();
}

enum class ProtocolStep { StepI, StepII, StepIII, Extension };

inline const char* step_name(ProtocolStep step) {
  switch (step) {
    case ProtocolStep::StepI: return "I";
    case ProtocolStep::StepII: return "II";
    case ProtocolStep::StepIII: return "III";
    case ProtocolStep::Extension: return "III+";
  }
  return "?";
}

struct PulseSegment {
  GeneratorMatrix generator;
  double duration;
  ProtocolStep step;
};

struct ScheduleMarkers {
  double tau1;
  double tau2;
  double tau3;
};

/// Ordered piecewise-constant segments on the full 3N-mode network.
class PulseSchedule {
 public:
  PulseSchedule(ProtocolParameters params, ModeLayout layout, std::vector<PulseSegment> segments,
                ScheduleMarkers markers, AdjacencyMatrix target)
      : params_(params),
        layout_(std::move(layout)),
        segments_(std::move(segments)),
        markers_(markers),
        target_(std::move(target)) {}

  const ProtocolParameters& parameters() const noexcept { return params_; }
  const ModeLayout& layout() const noexcept { return layout_; }
  const std::vector<PulseSegment>& segments() const noexcept { return segments_; }
  std::vector<PulseSegment>& mutable_segments() noexcept { return segments_; }
  const ScheduleMarkers& markers() const noexcept { return markers_; }
  /// Graph of the 50:50 (theta = pi/8) cluster state; nullifiers along the
  /// trajectory are taken with respect to it whatever theta is.
  const AdjacencyMatrix& target_adjacency() const noexcept { return target_; }

  double total_duration() const {
    double t = 0.0;
    for (const auto& seg : segments_) t += seg.duration;
    return t;
  }

 private:
  ProtocolParameters params_;
  ModeLayout layout_;
  std::vector<PulseSegment> segments_;
  ScheduleMarkers markers_;
  AdjacencyMatrix target_;
};

/// Step I runs the four per-column pulses concurrently on all columns:
/// swap b_{N+n} into a_n (-i phase, pi/2g_I), two-mode squeeze b_n with a_n
/// for alpha/g_I, a pi/4g_I beam splitter between b_n and a_n, and a swap back
/// into b_{N+n} (+i phase, pi/2g_I). Steps II and III each last pi/g0;
/// `extend_step3` continues the Step-III drive past tau_3.
inline PulseSchedule build_schedule(const ProtocolParameters& p, double extend_step3 = 0.0) {
  if (!(p.g_i > 0.0) || !(p.g0 > 0.0)) throw InvalidArgument("build_schedule: couplings must be positive");
  if (!(p.alpha >= 0.0)) throw InvalidArgument("build_schedule: alpha must be >= 0");
  if (!std::isfinite(p.r) || !std::isfinite(p.theta)) throw InvalidArgument("build_schedule: r and theta must be finite");
  if (!(extend_step3 >= 0.0)) throw InvalidArgument("build_schedule: extension must be >= 0");
  const ModeLayout layout(p.resonators);
  const std::size_t n = p.resonators;
  const double pi = std::numbers::pi;

  const auto combined = [&](auto&& one, std::string label) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(layout.quadrature_dim()),
                            static_cast<Eigen::Index>(layout.quadrature_dim()));
    for (std::size_t site = 1; site <= n; ++site) g += one(site).matrix();
    return GeneratorMatrix(std::move(g), std::move(label));
  };

  std::vector<PulseSegment> segs;
  segs.push_back({combined([&](std::size_t s) { return generator_beam_splitter(layout, s, n + s, p.g_i, Phase::MinusI); },
                           "I.1 swap lower->cavity"),
                  pi / (2.0 * p.g_i), ProtocolStep::StepI});
  segs.push_back({combined([&](std::size_t s) { return generator_two_mode_squeeze(layout, s, s, -p.g_i); },
                           "I.2 two-mode squeeze upper/cavity"),
                  p.alpha / p.g_i, ProtocolStep::StepI});
  segs.push_back({combined([&](std::size_t s) { return generator_beam_splitter(layout, s, s, p.g_i); },
                           "I.3 quarter beam splitter upper/cavity"),
                  pi / (4.0 * p.g_i), ProtocolStep::StepI});
  segs.push_back({combined([&](std::size_t s) { return generator_beam_splitter(layout, s, n + s, p.g_i, Phase::PlusI); },
                           "I.4 swap cavity->lower"),
                  pi / (2.0 * p.g_i), ProtocolStep::StepI});

  Matrix g2 = Matrix::Zero(static_cast<Eigen::Index>(layout.quadrature_dim()),
                           static_cast<Eigen::Index>(layout.quadrature_dim()));
  for (const auto& [red, blue] : step2_pairs(n)) {
    g2 += generator_step2(layout, step2_site(n, red), red, blue, p.g0, p.r).matrix();
  }
  segs.push_back({GeneratorMatrix(std::move(g2), "II two-mode squeeze via cavity bus"), pi / p.g0, ProtocolStep::StepII});

  const GeneratorMatrix g3 =
      combined([&](std::size_t s) { return generator_step3(layout, s, p.g0, p.theta); }, "III beam splitter via cavity bus");
  segs.push_back({g3, pi / p.g0, ProtocolStep::StepIII});
  if (extend_step3 > 0.0) segs.push_back({g3, extend_step3, ProtocolStep::Extension});

  double tau1 = 0.0;
  for (const auto& seg : segs) {
    if (seg.step == ProtocolStep::StepI) tau1 += seg.duration;
  }
  const ScheduleMarkers markers{tau1, tau1 + pi / p.g0, tau1 + 2.0 * pi / p.g0};
  return PulseSchedule(p, layout, std::move(segs), markers, probe_adjacency(n));
}

/// Lossless full-network propagator of the schedule, optionally including the extension.
inline Matrix pulsed_propagator(const PulseSchedule& schedule, bool include_extension = false) {
  const auto d = static_cast<Eigen::Index>(schedule.layout().quadrature_dim());
  Matrix s = Matrix::Identity(d, d);
  for (const auto& seg : schedule.segments()) {
    if (seg.step == ProtocolStep::Extension && !include_extension) continue;
    if (seg.duration == 0.0) continue;
    s = (hamiltonian_propagator(seg.generator, seg.duration) * s).eval();
  }
  return s;
}

/// Mechanical-sector block of a full-network (6N) matrix.
inline Matrix mechanical_block(const Matrix& full, const ModeLayout& layout) {
  const auto idx = layout.mechanical_quadratures();
  return full(idx, idx);
}

}  // namespace cvcluster
