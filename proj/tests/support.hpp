#pragma once

// Random matrices for property tests.

#include <complex>
#include <cstdint>
#include <random>

#include "qsl/linalg.hpp"

namespace qsl::testing {

inline CMatrix random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index dim) {
  const CMatrix a = random_complex(rng, dim, dim);
  return 0.5 * (a + a.adjoint());
}

/// Random density matrix of the given rank (full rank by default).
inline CMatrix random_density(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index rank = -1) {
  if (rank < 0) rank = dim;
  const CMatrix a = random_complex(rng, dim, rank);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return hermitian_part(rho);
}

/// Random traceless Hermitian direction.
inline CMatrix random_tangent(std::mt19937_64& rng, Eigen::Index dim) {
  CMatrix h = random_hermitian(rng, dim);
  h -= (h.trace() / static_cast<double>(dim)) * CMatrix::Identity(dim, dim);
  return h;
}

inline CVector random_state(std::mt19937_64& rng, Eigen::Index dim) {
  CVector v = random_complex(rng, dim, 1);
  return v / v.norm();
}

}  // namespace qsl::testing
