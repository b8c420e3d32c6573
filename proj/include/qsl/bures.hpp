#pragma once

// SLD quantum Fisher information, Uhlmann fidelity, and the Schur-complement
// profiling of nuisance parameters.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "qsl/errors.hpp"
#include "qsl/linalg.hpp"

namespace qsl {

inline constexpr double kDefaultSupportCutoff = 1e-10;
inline constexpr double kSupportMismatchTolerance = 1e-6;

/// Block-partitioned QFIM over (t, lambda^1..lambda^{m-1}).
struct QfimBlocks {
  double f_tt = 0.0;
  RVector f_tl;  // F_{t alpha}
  RMatrix f_ll;  // F_{alpha beta}

  Eigen::Index size() const { return 1 + f_tl.size(); }
  Eigen::Index n_nuisance() const { return f_tl.size(); }

  RMatrix full() const {
    const Eigen::Index m = size();
    RMatrix f(m, m);
    f(0, 0) = f_tt;
    if (m > 1) {
      f.block(1, 0, m - 1, 1) = f_tl;
      f.block(0, 1, 1, m - 1) = f_tl.transpose();
      f.block(1, 1, m - 1, m - 1) = f_ll;
    }
    return f;
  }

  static QfimBlocks from_full(const RMatrix& f) {
    if (f.rows() != f.cols() || f.rows() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "QfimBlocks: need a non-empty square matrix");
    }
    const Eigen::Index m = f.rows();
    const RMatrix sym = 0.5 * (f + f.transpose());
    QfimBlocks out;
    out.f_tt = sym(0, 0);
    out.f_tl = sym.block(1, 0, m - 1, 1);
    out.f_ll = sym.block(1, 1, m - 1, m - 1);
    return out;
  }
};

struct ProjectedSpeedSample {
  double t = 0.0;
  double f_eff = 0.0;
  double v_quo = 0.0;
  double v_phys = 0.0;
};

inline ProjectedSpeedSample make_speed_sample(double t, double f_tt, double f_eff) {
  return {t, f_eff, 0.5 * std::sqrt(std::max(f_eff, 0.0)), 0.5 * std::sqrt(std::max(f_tt, 0.0))};
}

namespace detail {

inline void require_density(const CMatrix& rho, const char* where) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": state is not square");
  }
  const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > 1e-6) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(where) + ": state trace deviates from 1 by " + std::to_string(tr_err));
  }
}

inline void require_tangent(const CMatrix& rho, const CMatrix& drho, const char* where) {
  if (drho.rows() != rho.rows() || drho.cols() != rho.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": tangent shape mismatch");
  }
  const double scale = std::max(1.0, drho.norm());
  if (hermiticity_defect(drho) > kHermitianTolerance * scale) {
    throw Error(ErrorCode::NonHermitianInput, std::string(where) + ": tangent is not Hermitian");
  }
  if (std::abs(drho.trace()) > 1e-8 * scale) {
    throw Error(ErrorCode::InvalidArgument, std::string(where) + ": tangent is not traceless");
  }
}

/// Eigenbasis of rho with the support threshold already resolved.
struct SupportFrame {
  EigenDecomposition eig;
  double threshold = 0.0;  // pairs with p_i + p_j <= threshold are dropped
};

inline SupportFrame make_frame(const CMatrix& rho, double support_cutoff) {
  SupportFrame frame{eig_hermitian(rho), 0.0};
  frame.threshold = support_cutoff * std::max(frame.eig.eigenvalues.maxCoeff(), 0.0);
  return frame;
}

/// SLD components in the eigenbasis of rho: L_ij = 2 D_ij / (p_i + p_j).
inline CMatrix sld_eigenbasis(const SupportFrame& frame, const CMatrix& d_eig) {
  const RVector& p = frame.eig.eigenvalues;
  const Eigen::Index n = p.size();
  CMatrix l = CMatrix::Zero(n, n);
  double outside = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double denom = p(i) + p(j);
      if (denom > frame.threshold && denom > 0.0) {
        l(i, j) = 2.0 * d_eig(i, j) / denom;
      } else {
        outside = std::max(outside, std::abs(d_eig(i, j)));
      }
    }
  }
  if (outside > kSupportMismatchTolerance) {
    throw Error(ErrorCode::SupportMismatch,
                "tangent has weight " + std::to_string(outside) + " outside supp(rho)");
  }
  return l;
}

}  // namespace detail

/// Symmetric logarithmic derivative L solving drho = (rho L + L rho) / 2 on
/// supp(rho). Returned in the computational basis.
inline HermitianMatrix solve_sld(const DensityMatrix& rho, const TangentMatrix& drho,
                                 double support_cutoff = kDefaultSupportCutoff) {
  detail::require_density(rho, "solve_sld");
  detail::require_tangent(rho, drho, "solve_sld");
  const auto frame = detail::make_frame(rho, support_cutoff);
  const CMatrix& u = frame.eig.eigenvectors;
  const CMatrix l = detail::sld_eigenbasis(frame, u.adjoint() * drho * u);
  return hermitian_part(u * l * u.adjoint());
}

/// QFIM F_{mu nu} = Re Tr(rho L_mu L_nu) = Re Tr[(d_mu rho) L_nu], tangents ordered
/// (t, lambda...).
inline QfimBlocks qfim_from_tangents(const DensityMatrix& rho, std::span<const TangentMatrix> tangents,
                                     double support_cutoff = kDefaultSupportCutoff) {
  if (tangents.empty()) {
    throw Error(ErrorCode::InvalidArgument, "qfim_from_tangents: need at least the time tangent");
  }
  detail::require_density(rho, "qfim_from_tangents");
  const auto frame = detail::make_frame(rho, support_cutoff);
  const CMatrix& u = frame.eig.eigenvectors;

  const auto m = static_cast<Eigen::Index>(tangents.size());
  std::vector<CMatrix> d(tangents.size());
  std::vector<CMatrix> l(tangents.size());
  for (std::size_t k = 0; k < tangents.size(); ++k) {
    detail::require_tangent(rho, tangents[k], "qfim_from_tangents");
    d[k] = u.adjoint() * tangents[k] * u;
    l[k] = detail::sld_eigenbasis(frame, d[k]);
  }
  RMatrix f(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      // Tr(D_a L_b) = sum_ij D_a,ji L_b,ij
      f(a, b) = (d[a].transpose().cwiseProduct(l[b])).sum().real();
    }
  }
  return QfimBlocks::from_full(f);
}

inline QfimBlocks qfim_from_tangents(const DensityMatrix& rho, const std::vector<TangentMatrix>& tangents,
                                     double support_cutoff = kDefaultSupportCutoff) {
  return qfim_from_tangents(rho, std::span<const TangentMatrix>(tangents), support_cutoff);
}

/// Pure-state QFIM from local generators: F = 4 Re Cov(G_mu, G_nu).
inline QfimBlocks qfim_pure_generators(const CVector& psi0, std::span<const HermitianMatrix> generators) {
  if (std::abs(psi0.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotNormalized,
                "qfim_pure_generators: |psi0| = " + std::to_string(psi0.norm()));
  }
  if (generators.empty()) {
    throw Error(ErrorCode::InvalidArgument, "qfim_pure_generators: no generators");
  }
  const auto m = static_cast<Eigen::Index>(generators.size());
  std::vector<CVector> g_psi;
  std::vector<Complex> mean;
  for (const auto& g : generators) {
    if (g.rows() != psi0.size() || g.cols() != psi0.size()) {
      throw Error(ErrorCode::DimensionMismatch, "qfim_pure_generators: generator shape");
    }
    g_psi.push_back(g * psi0);
    mean.push_back(psi0.dot(g_psi.back()));
  }
  RMatrix f(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      // <G_a G_b> = <G_a psi | G_b psi> for Hermitian G_a.
      const Complex second = g_psi[a].dot(g_psi[b]);
      f(a, b) = 4.0 * (second - std::conj(mean[a]) * mean[b]).real();
    }
  }
  return QfimBlocks::from_full(f);
}

inline QfimBlocks qfim_pure_generators(const CVector& psi0, const std::vector<HermitianMatrix>& generators) {
  return qfim_pure_generators(psi0, std::span<const HermitianMatrix>(generators));
}

/// F_eff = F_tt - f^T pinv(F_ll) f, clamped into [0, F_tt].
inline double schur_effective(const QfimBlocks& f, double rank_tol = kDefaultRankTol) {
  if (f.n_nuisance() == 0) return std::max(f.f_tt, 0.0);
  if (f.f_ll.rows() != f.n_nuisance() || f.f_ll.cols() != f.n_nuisance()) {
    throw Error(ErrorCode::DimensionMismatch, "schur_effective: nuisance block shape");
  }
  const RMatrix inv = pinv_psd(f.f_ll, rank_tol);
  const double value = f.f_tt - f.f_tl.dot(inv * f.f_tl);
  const double scale = std::max(1.0, std::abs(f.f_tt));
  if (value < -1e-6 * scale) {
    throw Error(ErrorCode::NegativeEffective,
                "schur_effective: F_eff = " + std::to_string(value) + " (inconsistent blocks)");
  }
  return std::clamp(value, 0.0, std::max(f.f_tt, 0.0));
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
///
/// Evaluated on the support of whichever argument has lower numerical rank, so
/// roundoff-level eigenvalues never pass through a square root. For a pure
/// argument this is exactly <psi|sigma|psi>.
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "uhlmann_fidelity: shape mismatch");
  }
  constexpr double kRoundoffRank = 1e-14;
  auto support = [&](const CMatrix& m) {
    auto e = eig_hermitian(m);
    if (e.eigenvalues.minCoeff() < -kNegativeClamp) {
      throw Error(ErrorCode::IndefiniteInput, "uhlmann_fidelity: state has a negative eigenvalue");
    }
    const double cut = kRoundoffRank * std::max(e.eigenvalues.maxCoeff(), 0.0);
    Eigen::Index first = 0;
    while (first < e.eigenvalues.size() && e.eigenvalues(first) <= cut) ++first;
    return std::make_pair(std::move(e), first);
  };
  auto [ea, fa] = support(rho);
  auto [eb, fb] = support(sigma);
  const bool swap = (eb.eigenvalues.size() - fb) < (ea.eigenvalues.size() - fa);
  const auto& e = swap ? eb : ea;
  const Eigen::Index first = swap ? fb : fa;
  const CMatrix& other = swap ? rho : sigma;

  const Eigen::Index r = e.eigenvalues.size() - first;
  if (r == 0) return 0.0;
  const CMatrix v = e.eigenvectors.rightCols(r);
  const RVector root = e.eigenvalues.tail(r).cwiseSqrt();
  const CMatrix inner = hermitian_part(root.cast<Complex>().asDiagonal() * (v.adjoint() * other * v) *
                                       root.cast<Complex>().asDiagonal());
  const double tr = matrix_sqrt_psd(inner).trace().real();
  return std::clamp(tr * tr, 0.0, 1.0);
}

inline double angle_from_fidelity(double fidelity) {
  return std::acos(std::sqrt(std::clamp(fidelity, 0.0, 1.0)));
}

inline double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return angle_from_fidelity(uhlmann_fidelity(rho, sigma));
}

}  // namespace qsl
