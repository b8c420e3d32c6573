#pragma once

// Dense complex-Hermitian linear algebra for small dimensions (d <= ~16).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qsl/errors.hpp"

namespace qsl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Role aliases. All are dense matrices; the invariants are enforced by the
// operations that consume them.
using HermitianMatrix = CMatrix;
using DensityMatrix = CMatrix;
using TangentMatrix = CMatrix;
using RealSymmetricMatrix = RMatrix;

inline constexpr double kHermitianTolerance = 1e-9;
inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kNegativeClamp = 1e-10;

struct EigenDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns |i>
};

/// Largest entrywise deviation |M_ij - conj(M_ji)|.
inline double hermiticity_defect(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double symmetry_defect(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline EigenDecomposition eig_hermitian(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "eig_hermitian: matrix is not square");
  }
  const double defect = hermiticity_defect(m);
  if (defect > kHermitianTolerance) {
    throw Error(ErrorCode::NonHermitianInput,
                "eig_hermitian: Hermiticity defect " + std::to_string(defect));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Moore-Penrose pseudoinverse of a real symmetric PSD matrix. Eigenvalues at or
/// below rank_tol * max(s) are treated as zero.
inline RMatrix pinv_psd(const RMatrix& s, double rank_tol = kDefaultRankTol) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "pinv_psd: matrix is not square");
  }
  if (s.size() == 0) return s;
  if (symmetry_defect(s) > kHermitianTolerance * std::max(1.0, s.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::NonHermitianInput, "pinv_psd: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(0.5 * (s + s.transpose()));
  const RVector& ev = solver.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-8 * scale) {
    throw Error(ErrorCode::IndefiniteInput,
                "pinv_psd: eigenvalue " + std::to_string(ev.minCoeff()) + " below zero");
  }
  RVector inv = RVector::Zero(ev.size());
  const double cutoff = rank_tol * ev.maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff && ev(i) > 0.0) inv(i) = 1.0 / ev(i);
  }
  const RMatrix& u = solver.eigenvectors();
  return u * inv.asDiagonal() * u.transpose();
}

/// Positive square root of a PSD Hermitian matrix. Eigenvalues in
/// [-1e-10, 0) are clamped to zero.
inline CMatrix matrix_sqrt_psd(const CMatrix& m) {
  const auto [ev, u] = eig_hermitian(m);
  RVector root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kNegativeClamp) {
      throw Error(ErrorCode::IndefiniteInput,
                  "matrix_sqrt_psd: eigenvalue " + std::to_string(ev(i)) + " below clamp");
    }
    root(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return u * root.cast<Complex>().asDiagonal() * u.adjoint();
}

// Pauli matrices and friends, in the ordered basis {|0>, |1>}.
namespace pauli {

inline CMatrix identity() { return CMatrix::Identity(2, 2); }

inline CMatrix x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline CMatrix y() {
  CMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

inline CMatrix z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }
inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

inline CMatrix projector(const CVector& psi) { return psi * psi.adjoint(); }

}  // namespace qsl
