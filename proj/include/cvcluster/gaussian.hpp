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

// Zero-mean Gaussian states in the (Q_1..Q_M, P_1..P_M) quadrature ordering
// with hbar = 1 and vacuum variance 1/2.

#pragma once

#include <algorithm>
#include <charconv>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "cvcluster/error.hpp"

namespace cvcluster {

/// Working precision. Highly squeezed states (|V| ~ 1e6 and up) are not
/// representable within the uncertainty bound at double precision, so every
/// matrix is stored in extended precision.
using Real = long double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

/// Quad precision for the few steps whose error grows with the squeezing.
using Wide = boost::multiprecision::float128;
using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;

inline WideMatrix widen(const Matrix& m) {
  return m.unaryExpr([](Real x) { return Wide(x); });
}

inline Matrix narrow(const WideMatrix& m) {
  return m.unaryExpr([](const Wide& x) { return static_cast<Real>(x); });
}

}  // namespace detail

inline constexpr double kVacuumVariance = 0.5;

/// Tolerance on symplectic eigenvalues for closed-form (ideal) states.
inline constexpr double kPhysicalityTol = 1e-9;

/// Relative cutoff on singular values inside pseudo_inverse().
inline constexpr double kPseudoInverseRelTol = 1e-12;

enum class Quadrature { Q, P };

/// Largest absolute entry, 0 for an empty matrix.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

/// Row/column of Q_mode (or P_mode) for a state with `mode_count` modes.
inline constexpr std::size_t quadrature_index(std::size_t mode, Quadrature which,
                                              std::size_t mode_count) {
  return which == Quadrature::Q ? mode : mode_count + mode;
}

/// Sigma = [[0, I_M], [-I_M, 0]].
inline Matrix symplectic_form(std::size_t mode_count) {
  if (mode_count == 0) throw InvalidDimension("symplectic_form: mode count must be >= 1");
  const auto m = static_cast<Eigen::Index>(mode_count);
  Matrix sigma = Matrix::Zero(2 * m, 2 * m);
  sigma.topRightCorner(m, m).setIdentity();
  sigma.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return sigma;
}

namespace detail {

inline void require_square_even(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw InvalidDimension(std::string(what) + ": expected a non-empty square matrix of even dimension, got " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalFailure(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// ||S Sigma S^T - Sigma||_max <= tol.
inline bool is_symplectic(const Matrix& s, double tol) {
  detail::require_square_even(s, "is_symplectic");
  const Matrix sigma = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
  return max_abs(s * sigma * s.transpose() - sigma) <= tol;
}

/// Symmetric second-moment matrix V_mn = <R_m R_n + R_n R_m>/2 of a zero-mean state.
///
/// Construction rejects non-square, odd, non-finite or visibly asymmetric input
/// and stores the exactly symmetrized matrix. Physicality is not checked here;
/// see require_physical().
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix v) : v_(std::move(v)) {
    detail::require_square_even(v_, "CovarianceMatrix");
    detail::require_finite(v_, "CovarianceMatrix");
    const double scale = std::max(1.0, max_abs(v_));
    if (max_abs(v_ - v_.transpose()) > 1e-9 * scale) {
      throw InvalidArgument("CovarianceMatrix: matrix is not symmetric");
    }
    v_ = 0.5 * (v_ + v_.transpose()).eval();
  }

  static CovarianceMatrix vacuum(std::size_t mode_count) { return thermal(mode_count, 0.0); }

  /// Product of thermal states, <Q^2> = <P^2> = n_th + 1/2.
  static CovarianceMatrix thermal(std::size_t mode_count, double n_th) {
    if (mode_count == 0) throw InvalidDimension("thermal: mode count must be >= 1");
    if (!(n_th >= 0.0)) throw InvalidArgument("thermal: n_th must be >= 0");
    const auto d = static_cast<Eigen::Index>(2 * mode_count);
    return CovarianceMatrix(Matrix::Identity(d, d) * (n_th + kVacuumVariance));
  }

  const Matrix& matrix() const noexcept { return v_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.rows()); }
  std::size_t mode_count() const noexcept { return dim() / 2; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return v_(i, j); }

 private:
  Matrix v_;
};

/// Real 2M x 2M matrix preserving Sigma, with blocks
///   [ S_A  S_B ]   Q(t) = S_A Q + S_B P
///   [ S_C  S_D ]   P(t) = S_C Q + S_D P
class SymplecticMatrix {
 public:
  /// Rejects matrices that fail S Sigma S^T = Sigma by more than
  /// rel_tol * max(1, |S|_max^2); the scale factor keeps strongly squeezing
  /// maps (entries ~ e^{60}) representable.
  explicit SymplecticMatrix(Matrix s, double rel_tol = 1e-10) : s_(std::move(s)) {
    detail::require_square_even(s_, "SymplecticMatrix");
    detail::require_finite(s_, "SymplecticMatrix");
    const double scale = std::max(1.0, max_abs(s_) * max_abs(s_));
    const Matrix sigma = symplectic_form(mode_count());
    const double err = max_abs(s_ * sigma * s_.transpose() - sigma);
    if (err > rel_tol * scale) {
      throw InvalidArgument("SymplecticMatrix: S Sigma S^T deviates from Sigma by " + std::to_string(err));
    }
  }

  static SymplecticMatrix identity(std::size_t mode_count) {
    const auto d = static_cast<Eigen::Index>(2 * mode_count);
    return SymplecticMatrix(Matrix::Identity(d, d));
  }

  const Matrix& matrix() const noexcept { return s_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(s_.rows()); }
  std::size_t mode_count() const noexcept { return dim() / 2; }

  Matrix block_a() const { return s_.topLeftCorner(half(), half()); }
  Matrix block_b() const { return s_.topRightCorner(half(), half()); }
  Matrix block_c() const { return s_.bottomLeftCorner(half(), half()); }
  Matrix block_d() const { return s_.bottomRightCorner(half(), half()); }

  /// Composition: (*this) applied after `first`.
  SymplecticMatrix after(const SymplecticMatrix& first) const {
    if (first.dim() != dim()) throw InvalidDimension("SymplecticMatrix::after: dimension mismatch");
    return SymplecticMatrix(s_ * first.s_);
  }

 private:
  Eigen::Index half() const { return s_.rows() / 2; }
  Matrix s_;
};

/// V -> S_k ... S_1 V S_1^T ... S_k^T for `maps` = {S_1, ..., S_k}.
///
/// Round-off in long double is about |S|^2 eps |V|, which reaches the
/// physicality tolerance for strongly squeezed maps, so the whole chain is
/// applied in quad and rounded once.
inline CovarianceMatrix apply_symplectic(const CovarianceMatrix& v, const std::vector<SymplecticMatrix>& maps) {
  detail::WideMatrix out = detail::widen(v.matrix());
  for (const SymplecticMatrix& s : maps) {
    if (v.dim() != s.dim()) {
      throw InvalidDimension("apply_symplectic: covariance is " + std::to_string(v.dim()) +
                             "-dimensional, symplectic is " + std::to_string(s.dim()));
    }
    const detail::WideMatrix ws = detail::widen(s.matrix());
    out = ws * out * ws.transpose();
    out = (detail::Wide(0.5) * (out + out.transpose())).eval();
  }
  return CovarianceMatrix(detail::narrow(out));
}

/// V -> S V S^T.
inline CovarianceMatrix apply_symplectic(const CovarianceMatrix& v, const SymplecticMatrix& s) {
  return apply_symplectic(v, std::vector<SymplecticMatrix>{s});
}

namespace detail {

/// Condition number above which long double loses the physicality tolerance.
inline constexpr Real kWideEigenCondition = 1e9L;

template <class M>
std::vector<double> symplectic_spectrum(const M& l, std::size_t modes) {
  using Scalar = typename M::Scalar;
  const M sigma = symplectic_form(modes).unaryExpr([](Real x) { return Scalar(x); });
  const M k = l.transpose() * sigma * l;
  const Eigen::JacobiSVD<M> svd(k);
  const auto& sv = svd.singularValues();  // descending
  std::vector<double> nu;
  nu.reserve(modes);
  for (Eigen::Index i = sv.size() - 1; i > 0; i -= 2) {
    // Degenerate pairs; average them to cancel the split from round-off.
    nu.push_back(static_cast<double>(Scalar(0.5) * (sv(i) + sv(i - 1))));
  }
  return nu;
}

}  // namespace detail

/// Moduli of the eigenvalues of i Sigma V, one per mode, ascending.
///
/// Uses V = L L^T and the antisymmetric K = L^T Sigma L, whose singular values
/// are the symplectic eigenvalues (each twice). The error is about
/// eps cond(V), so ill-conditioned (strongly squeezed) inputs are redone in quad.
inline std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& v) {
  const Eigen::LLT<Matrix> llt(v.matrix());
  if (llt.info() != Eigen::Success) {
    throw UnphysicalState("symplectic_eigenvalues: covariance matrix is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const Vector diag = l.diagonal();
  const Real ratio = diag.maxCoeff() / diag.minCoeff();
  if (ratio * ratio < detail::kWideEigenCondition) return detail::symplectic_spectrum(l, v.mode_count());
  const Eigen::LLT<detail::WideMatrix> wide(detail::widen(v.matrix()));
  if (wide.info() != Eigen::Success) {
    throw UnphysicalState("symplectic_eigenvalues: covariance matrix is not positive definite");
  }
  return detail::symplectic_spectrum(detail::WideMatrix(wide.matrixL()), v.mode_count());
}

/// min_k nu_k - 1/2; negative values mean an unphysical state.
inline double physicality_margin(const CovarianceMatrix& v) {
  return symplectic_eigenvalues(v).front() - kVacuumVariance;
}

inline bool is_physical(const CovarianceMatrix& v, double tol = kPhysicalityTol) {
  const Eigen::LLT<Matrix> llt(v.matrix());
  if (llt.info() != Eigen::Success) return false;
  return physicality_margin(v) >= -tol;
}

inline std::string format_scientific(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific, 3);
  return std::string(buf.data(), res.ptr);
}

inline void require_physical(const CovarianceMatrix& v, double tol, const std::string& context) {
  if (!is_physical(v, tol)) {
    const Eigen::LLT<Matrix> llt(v.matrix());
    const std::string detail = llt.info() == Eigen::Success
                                   ? "smallest symplectic eigenvalue - 1/2 = " + format_scientific(physicality_margin(v))
                                   : "matrix not positive definite";
    throw UnphysicalState(context + ": unphysical covariance (" + detail + ")");
  }
}

/// Moore-Penrose pseudoinverse; singular values below rel_tol * sigma_max are dropped.
inline Matrix pseudo_inverse(const Matrix& m, double rel_tol = kPseudoInverseRelTol) {
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Matrix result = Matrix::Zero(m.cols(), m.rows());
  if (sv.size() == 0 || sv(0) == 0.0) return result;
  const Real cutoff = rel_tol * sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      result += svd.matrixV().col(i) * (1.0 / sv(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return result;
}

/// Logarithmic negativity (natural log) of a two-mode state.
///
/// Partial transposition flips P_2; the result is max(0, -ln(2 nu_min)) of the
/// transposed covariance.
inline double logarithmic_negativity(const CovarianceMatrix& v, double tol = kPhysicalityTol) {
  if (v.mode_count() != 2) {
    throw InvalidDimension("logarithmic_negativity: only two-mode states are supported, got " +
                           std::to_string(v.mode_count()) + " modes");
  }
  require_physical(v, tol, "logarithmic_negativity");
  Vector flip = Vector::Ones(4);
  flip(3) = -1.0;
  const CovarianceMatrix transposed(flip.asDiagonal() * v.matrix() * flip.asDiagonal());
  const double nu_min = symplectic_eigenvalues(transposed).front();
  return std::max(0.0, -std::log(2.0 * nu_min));
}

/// Conditional covariance of the other modes after a perfect homodyne
/// measurement of one quadrature of `mode`.
///
/// Returns V_Re - V_col (Pi V_M Pi)^+ V_col^T; the remaining modes keep their
/// relative order and the measured mode is removed.
inline CovarianceMatrix measure_quadrature(const CovarianceMatrix& v, std::size_t mode, Quadrature which,
                                           double tol = kPhysicalityTol) {
  const std::size_t m = v.mode_count();
  if (mode >= m) {
    throw InvalidArgument("measure_quadrature: mode " + std::to_string(mode) + " out of range for " +
                          std::to_string(m) + " modes");
  }
  if (m < 2) throw InvalidDimension("measure_quadrature: cannot measure the last remaining mode");
  require_physical(v, tol, "measure_quadrature");

  std::vector<Eigen::Index> rest;
  rest.reserve(2 * (m - 1));
  for (Quadrature quad : {Quadrature::Q, Quadrature::P}) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k != mode) rest.push_back(static_cast<Eigen::Index>(quadrature_index(k, quad, m)));
    }
  }
  const std::array<Eigen::Index, 2> measured = {static_cast<Eigen::Index>(quadrature_index(mode, Quadrature::Q, m)),
                                                static_cast<Eigen::Index>(quadrature_index(mode, Quadrature::P, m))};

  const Matrix& full = v.matrix();
  const Matrix v_re = full(rest, rest);
  const Matrix v_col = full(rest, measured);
  Matrix projected = full(measured, measured);
  const Eigen::Index drop = which == Quadrature::Q ? 1 : 0;
  projected.row(drop).setZero();
  projected.col(drop).setZero();
  return CovarianceMatrix(v_re - v_col * pseudo_inverse(projected) * v_col.transpose());
}

/// <b^dagger b> = (V_QQ + V_PP - 1)/2 for one mode.
inline double mean_occupation(const CovarianceMatrix& v, std::size_t mode, double tol = kPhysicalityTol) {
  const std::size_t m = v.mode_count();
  if (mode >= m) throw InvalidArgument("mean_occupation: mode out of range");
  const auto q = static_cast<Eigen::Index>(quadrature_index(mode, Quadrature::Q, m));
  const auto p = static_cast<Eigen::Index>(quadrature_index(mode, Quadrature::P, m));
  const double n = 0.5 * (v(q, q) + v(p, p) - 1.0);
  if (n < -tol) throw UnphysicalState("mean_occupation: negative occupation " + std::to_string(n));
  return std::max(0.0, n);
}

/// Sub-state on the listed modes (in the listed order).
inline CovarianceMatrix reduced_state(const CovarianceMatrix& v, const std::vector<std::size_t>& modes) {
  const std::size_t m = v.mode_count();
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * modes.size());
  for (Quadrature quad : {Quadrature::Q, Quadrature::P}) {
    for (std::size_t k : modes) {
      if (k >= m) throw InvalidArgument("reduced_state: mode out of range");
      idx.push_back(static_cast<Eigen::Index>(quadrature_index(k, quad, m)));
    }
  }
  return CovarianceMatrix(v.matrix()(idx, idx));
}

}  // namespace cvcluster
