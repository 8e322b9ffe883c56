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

// Mode layout of the resonator array and the quadratic generators / damping
// channels acting on it.
//
// Full-network quadrature vector (6N entries):
//   (Q_1 .. Q_2N, Q_a1 .. Q_aN, P_1 .. P_2N, P_a1 .. P_aN)
// Mechanical labels 1..N are the upper modes, N+1..2N the lower modes; the
// cavity at site n is mode 2N+n. Sites are numbered from 1 because the
// coupling rule depends on site parity.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"

namespace cvcluster {

class ModeLayout {
 public:
  explicit ModeLayout(std::size_t resonators) : n_(resonators) {
    if (resonators < 2) throw InvalidArgument("ModeLayout: need at least 2 resonators");
    couplings_.resize(n_);
    const auto in_upper = [&](long m) { return m >= 1 && m <= static_cast<long>(n_); };
    const auto in_lower = [&](long m) { return m > static_cast<long>(n_) && m <= static_cast<long>(2 * n_); };
    const long big_n = static_cast<long>(n_);
    for (long site = 1; site <= big_n; ++site) {
      std::vector<long> candidates;
      if (site % 2 == 1) {
        candidates = {site, site + 1, big_n + site - 1, big_n + site};
      } else {
        candidates = {site - 1, site, big_n + site, big_n + site + 1};
      }
      auto& out = couplings_[static_cast<std::size_t>(site - 1)];
      // The first two candidates belong to the upper band, the last two to the lower band.
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const long m = candidates[k];
        if ((k < 2 && in_upper(m)) || (k >= 2 && in_lower(m))) out.push_back(static_cast<std::size_t>(m));
      }
      std::sort(out.begin(), out.end());
    }
  }

  std::size_t resonators() const noexcept { return n_; }
  std::size_t mechanical_count() const noexcept { return 2 * n_; }
  std::size_t mode_count() const noexcept { return 3 * n_; }
  std::size_t quadrature_dim() const noexcept { return 6 * n_; }

  /// Mode index of mechanical label m (1..2N).
  std::size_t mechanical(std::size_t label) const {
    if (label < 1 || label > 2 * n_) throw InvalidArgument("mechanical label " + std::to_string(label) + " out of range");
    return label - 1;
  }
  std::size_t upper(std::size_t site) const { return mechanical(check_site(site)); }
  std::size_t lower(std::size_t site) const { return mechanical(n_ + check_site(site)); }
  std::size_t cavity(std::size_t site) const { return 2 * n_ + check_site(site) - 1; }

  /// Mechanical labels the cavity at `site` couples to, ascending.
  const std::vector<std::size_t>& coupled_mechanical(std::size_t site) const {
    return couplings_[check_site(site) - 1];
  }

  bool allows(std::size_t site, std::size_t mechanical_label) const {
    const auto& set = coupled_mechanical(site);
    return std::find(set.begin(), set.end(), mechanical_label) != set.end();
  }

  /// Whether modes `a` and `b` (mode indices, either order) form an allowed
  /// cavity-mechanical pair.
  bool allows_modes(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    if (a >= 2 * n_ || b < 2 * n_ || b >= 3 * n_) return false;
    return allows(b - 2 * n_ + 1, a + 1);
  }

  std::size_t q_index(std::size_t mode) const { return quadrature_index(mode, Quadrature::Q, mode_count()); }
  std::size_t p_index(std::size_t mode) const { return quadrature_index(mode, Quadrature::P, mode_count()); }

  /// Quadrature rows/columns of the mechanical sector, in (Q_1..Q_2N, P_1..P_2N) order.
  std::vector<Eigen::Index> mechanical_quadratures() const {
    std::vector<Eigen::Index> idx;
    for (Quadrature quad : {Quadrature::Q, Quadrature::P}) {
      for (std::size_t m = 0; m < 2 * n_; ++m) {
        idx.push_back(static_cast<Eigen::Index>(quadrature_index(m, quad, mode_count())));
      }
    }
    return idx;
  }

  std::vector<Eigen::Index> cavity_quadratures() const {
    std::vector<Eigen::Index> idx;
    for (Quadrature quad : {Quadrature::Q, Quadrature::P}) {
      for (std::size_t m = 2 * n_; m < 3 * n_; ++m) {
        idx.push_back(static_cast<Eigen::Index>(quadrature_index(m, quad, mode_count())));
      }
    }
    return idx;
  }

 private:
  std::size_t check_site(std::size_t site) const {
    if (site < 1 || site > n_) throw InvalidArgument("site " + std::to_string(site) + " out of range");
    return site;
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> couplings_;
};

inline ModeLayout build_layout(std::size_t resonators) { return ModeLayout(resonators); }

/// Symmetric G of H = (1/2) R^T G R on the full network.
class GeneratorMatrix {
 public:
  GeneratorMatrix(Matrix g, std::string label) : g_(std::move(g)), label_(std::move(label)) {
    detail::require_square_even(g_, "GeneratorMatrix");
    if (g_ != g_.transpose()) throw InvalidArgument("GeneratorMatrix: matrix is not exactly symmetric");
  }

  static GeneratorMatrix zero(const ModeLayout& layout, std::string label = "idle") {
    const auto d = static_cast<Eigen::Index>(layout.quadrature_dim());
    return GeneratorMatrix(Matrix::Zero(d, d), std::move(label));
  }

  const Matrix& matrix() const noexcept { return g_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(g_.rows()); }

  /// True when every off-diagonal coupling joins an allowed cavity-mechanical pair
  /// and there are no diagonal (detuning) terms.
  bool supported_on(const ModeLayout& layout) const {
    if (dim() != layout.quadrature_dim()) return false;
    const std::size_t modes = layout.mode_count();
    for (Eigen::Index i = 0; i < g_.rows(); ++i) {
      for (Eigen::Index j = i; j < g_.cols(); ++j) {
        if (g_(i, j) == 0.0) continue;
        const auto mi = static_cast<std::size_t>(i) % modes;
        const auto mj = static_cast<std::size_t>(j) % modes;
        if (!layout.allows_modes(mi, mj)) return false;
      }
    }
    return true;
  }

  friend GeneratorMatrix operator+(const GeneratorMatrix& a, const GeneratorMatrix& b) {
    if (a.dim() != b.dim()) throw InvalidDimension("GeneratorMatrix: dimension mismatch in sum");
    return GeneratorMatrix(a.g_ + b.g_, a.label_ + " + " + b.label_);
  }

 private:
  Matrix g_;
  std::string label_;
};

/// Complex prefactor multiplying the coupling rate g.
enum class Phase { Real, PlusI, MinusI };

/// One bosonic ladder operator: b (dagger = false) or b^dagger.
struct Ladder {
  std::size_t mode;
  bool dagger;
};

namespace detail {

inline std::complex<Real> phase_factor(Phase phase) {
  switch (phase) {
    case Phase::Real: return {1.0L, 0.0L};
    case Phase::PlusI: return {0.0L, 1.0L};
    case Phase::MinusI: return {0.0L, -1.0L};
  }
  return {1.0L, 0.0L};
}

inline const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Real: return "";
    case Phase::PlusI: return "+i";
    case Phase::MinusI: return "-i";
  }
  return "";
}

}  // namespace detail

/// Quadrature form of coeff * x y + h.c. for ladder operators of two distinct modes.
///
/// Each operator is a complex linear form in R, b = (Q + iP)/sqrt(2). Since x
/// and y commute, coeff x y + h.c. = R^T W R with W = Re(coeff l m^T), where
/// l, m carry entries (1, +-i) and the two 1/sqrt(2) factors cancel the 2 from
/// adding the conjugate. Then G = W + W^T. Entries stay exact (no sqrt(2) round-off).
inline Matrix bilinear_generator(std::size_t mode_count, std::complex<Real> coeff, Ladder x, Ladder y) {
  if (x.mode == y.mode) throw InvalidArgument("bilinear_generator: operators must act on distinct modes");
  if (x.mode >= mode_count || y.mode >= mode_count) throw InvalidArgument("bilinear_generator: mode out of range");
  const auto form = [&](Ladder op) {
    using Form = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
    Form l = Form::Zero(static_cast<Eigen::Index>(2 * mode_count));
    l(static_cast<Eigen::Index>(quadrature_index(op.mode, Quadrature::Q, mode_count))) = {1.0L, 0.0L};
    l(static_cast<Eigen::Index>(quadrature_index(op.mode, Quadrature::P, mode_count))) = {0.0L, op.dagger ? -1.0L : 1.0L};
    return l;
  };
  const Matrix w = (coeff * form(x) * form(y).transpose()).real();
  Matrix g = w + w.transpose();
  // Map signed zeros to +0 so byte-level comparisons of generators are stable.
  return g.unaryExpr([](Real v) { return v == 0.0L ? 0.0L : v; });
}

namespace detail {

inline void require_allowed(const ModeLayout& layout, std::size_t site, std::size_t mech_label, const char* what) {
  if (!layout.allows(site, mech_label)) {
    throw InvalidArgument(std::string(what) + ": cavity " + std::to_string(site) +
                          " does not couple to mechanical mode " + std::to_string(mech_label));
  }
}

}  // namespace detail

/// g (b_m^dagger a_n + h.c.) times the phase: phase 0 gives g (Q_m Q_an + P_m P_an),
/// phase -i gives -i g (b_m^dagger a_n - a_n^dagger b_m).
inline GeneratorMatrix generator_beam_splitter(const ModeLayout& layout, std::size_t site, std::size_t mech_label,
                                               double g, Phase phase = Phase::Real) {
  detail::require_allowed(layout, site, mech_label, "generator_beam_splitter");
  const Matrix m = bilinear_generator(layout.mode_count(), Real(g) * detail::phase_factor(phase),
                                      {layout.mechanical(mech_label), true}, {layout.cavity(site), false});
  return GeneratorMatrix(m, std::string("BS") + detail::phase_name(phase) + "(a" + std::to_string(site) + ",b" +
                                std::to_string(mech_label) + ")");
}

/// g (b_m^dagger a_n^dagger + h.c.) times the phase: phase 0 gives g (Q_m Q_an - P_m P_an),
/// phase +i gives i g (b_m^dagger a_n^dagger - a_n b_m).
inline GeneratorMatrix generator_two_mode_squeeze(const ModeLayout& layout, std::size_t site, std::size_t mech_label,
                                                  double g, Phase phase = Phase::Real) {
  detail::require_allowed(layout, site, mech_label, "generator_two_mode_squeeze");
  const Matrix m = bilinear_generator(layout.mode_count(), Real(g) * detail::phase_factor(phase),
                                      {layout.mechanical(mech_label), true}, {layout.cavity(site), true});
  return GeneratorMatrix(m, std::string("TMS") + detail::phase_name(phase) + "(a" + std::to_string(site) + ",b" +
                                std::to_string(mech_label) + ")");
}

/// Simultaneous red drive on `red_label` and blue drive on `blue_label` through cavity `site`:
/// g1 (b_red^dagger a + h.c.) + i g2 (b_blue^dagger a^dagger - h.c.),
/// g1 = g0 cosh(r), g2 = -g0 sinh(r).
inline GeneratorMatrix generator_step2(const ModeLayout& layout, std::size_t site, std::size_t red_label,
                                       std::size_t blue_label, double g0, double r) {
  const GeneratorMatrix red = generator_beam_splitter(layout, site, red_label, g0 * std::cosh(r), Phase::Real);
  const GeneratorMatrix blue = generator_two_mode_squeeze(layout, site, blue_label, -g0 * std::sinh(r), Phase::PlusI);
  return GeneratorMatrix(red.matrix() + blue.matrix(), "TMS-bus(a" + std::to_string(site) + ",b" +
                                                          std::to_string(red_label) + ",b" +
                                                          std::to_string(blue_label) + ")");
}

/// Red drives on b_n and b_{N+n} through cavity n with g1 = g0 sin(theta), g2 = g0 cos(theta).
inline GeneratorMatrix generator_step3(const ModeLayout& layout, std::size_t site, double g0, double theta) {
  const std::size_t n = layout.resonators();
  const GeneratorMatrix first = generator_beam_splitter(layout, site, site, g0 * std::sin(theta));
  const GeneratorMatrix second = generator_beam_splitter(layout, site, n + site, g0 * std::cos(theta));
  return GeneratorMatrix(first.matrix() + second.matrix(),
                         "BS-bus(a" + std::to_string(site) + ",b" + std::to_string(site) + ",b" +
                             std::to_string(n + site) + ")");
}

/// Damping rates in units of g0.
struct DampingSpec {
  double kappa = 0.0;  ///< cavity energy decay rate
  double gamma = 0.0;  ///< mechanical energy decay rate
  double n_th = 0.0;   ///< bath phonon occupation
  /// Optional per-mechanical-mode rates overriding `gamma` (size 2N when set).
  std::vector<double> mechanical_gamma{};

  void validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("DampingSpec: kappa must be finite and >= 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("DampingSpec: gamma must be finite and >= 0");
    if (!(n_th >= 0.0) || !std::isfinite(n_th)) throw InvalidArgument("DampingSpec: n_th must be finite and >= 0");
    for (double g : mechanical_gamma) {
      if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("DampingSpec: per-mode gamma must be >= 0");
    }
  }

  bool is_lossless() const {
    return kappa == 0.0 && gamma == 0.0 &&
           std::all_of(mechanical_gamma.begin(), mechanical_gamma.end(), [](double g) { return g == 0.0; });
  }
};

/// Rows c_m^T with jump operators L_m = c_m^T R (5N x 6N).
class ChannelMatrix {
 public:
  explicit ChannelMatrix(ComplexMatrix c) : c_(std::move(c)) {}
  const ComplexMatrix& matrix() const noexcept { return c_; }
  std::size_t channels() const noexcept { return static_cast<std::size_t>(c_.rows()); }

 private:
  ComplexMatrix c_;
};

/// Per mechanical mode m: decay row sqrt(gamma (n_th+1)/2) (e_Qm + i e_Pm), then
/// heating row sqrt(gamma n_th / 2) (e_Qm - i e_Pm); then one row
/// sqrt(kappa/2) (e_Qa + i e_Pa) per cavity.
inline ChannelMatrix channel_matrix(const ModeLayout& layout, const DampingSpec& spec) {
  spec.validate();
  const std::size_t mech = layout.mechanical_count();
  if (!spec.mechanical_gamma.empty() && spec.mechanical_gamma.size() != mech) {
    throw InvalidDimension("channel_matrix: per-mode gamma needs " + std::to_string(mech) + " entries");
  }
  const auto rows = static_cast<Eigen::Index>(2 * mech + layout.resonators());
  const auto cols = static_cast<Eigen::Index>(layout.quadrature_dim());
  ComplexMatrix c = ComplexMatrix::Zero(rows, cols);
  Eigen::Index row = 0;
  const auto put = [&](std::size_t mode, Real amplitude, Real p_sign) {
    c(row, static_cast<Eigen::Index>(layout.q_index(mode))) = {amplitude, 0.0L};
    c(row, static_cast<Eigen::Index>(layout.p_index(mode))) = {0.0L, p_sign * amplitude};
    ++row;
  };
  for (std::size_t m = 0; m < mech; ++m) {
    const double gamma = spec.mechanical_gamma.empty() ? spec.gamma : spec.mechanical_gamma[m];
    put(m, std::sqrt(Real(gamma) * (Real(spec.n_th) + 1) / 2), 1);
    put(m, std::sqrt(Real(gamma) * Real(spec.n_th) / 2), -1);
  }
  for (std::size_t site = 1; site <= layout.resonators(); ++site) {
    put(layout.cavity(site), std::sqrt(Real(spec.kappa) / 2), 1);
  }
  return ChannelMatrix(std::move(c));
}

/// Coefficients of dV/dt = B V + V B^T + D.
struct DriftDiffusion {
  Matrix drift;      ///< B = Sigma (G + Im[C^dagger C])
  Matrix diffusion;  ///< D = Sigma Re[C^dagger C] Sigma^T
};

inline DriftDiffusion drift_diffusion(const GeneratorMatrix& g, const ChannelMatrix& c) {
  const auto dim = static_cast<Eigen::Index>(g.dim());
  if (c.matrix().cols() != dim) {
    throw InvalidDimension("drift_diffusion: generator is " + std::to_string(dim) + "-dimensional, channels have " +
                           std::to_string(c.matrix().cols()) + " columns");
  }
  const ComplexMatrix gram = c.matrix().adjoint() * c.matrix();
  const Matrix sigma = symplectic_form(g.dim() / 2);
  DriftDiffusion out;
  out.drift = sigma * (g.matrix() + gram.imag());
  out.diffusion = sigma * gram.real() * sigma.transpose();
  out.diffusion = 0.5L * (out.diffusion + out.diffusion.transpose()).eval();
  return out;
}

}  // namespace cvcluster
