#pragma once

// Closed (unitary) Jaynes-Cummings sensor in the single-excitation manifold
// {|e,0>, |g,1>}: H' = g tau_x + (Delta/2) tau_z, Delta = omega_q + gamma B - omega_c,
// prepared in |e,0> = (1, 0).

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsl/bures.hpp"
#include "qsl/errors.hpp"
#include "qsl/gksl.hpp"
#include "qsl/linalg.hpp"
#include "qsl/numerics.hpp"

namespace qsl::jc {

struct JcUnitaryParams {
  double g = 1.0;
  double delta = 0.0;    // Delta = omega_q + gamma B - omega_c
  double gamma_b = 1.0;  // d Delta / d B

  double rabi() const { return std::sqrt(delta * delta + 4.0 * g * g); }

  void validate() const {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::InvalidArgument, "JcUnitaryParams: g must be > 0");
    if (!std::isfinite(delta) || !std::isfinite(gamma_b)) {
      throw Error(ErrorCode::InvalidArgument, "JcUnitaryParams: non-finite parameter");
    }
  }

  JcUnitaryParams with_delta(double d) const { return {g, d, gamma_b}; }
};

/// G_B(t) = (gamma/2)(A_x tau_x + A_y tau_y + A_z tau_z).
struct GeneratorCoeffs {
  double a_x = 0.0;
  double a_y = 0.0;
  double a_z = 0.0;
};

namespace detail {

/// x - sin(x), accurate for small |x| where the subtraction cancels.
inline double x_minus_sin(double x) {
  if (std::abs(x) > 0.5) return x - std::sin(x);
  // x^3/3! - x^5/5! + ...
  const double x2 = x * x;
  double term = x * x2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
  }
  return sum;
}

inline double one_minus_cos(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

}  // namespace detail

inline GeneratorCoeffs generator_coeffs(const JcUnitaryParams& p, double t) {
  p.validate();
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "generator_coeffs: t must be >= 0");
  const double om = p.rabi();
  const double x = om * t;
  const double om2 = om * om;
  return {
      (2.0 * p.g * p.delta / om2) * detail::x_minus_sin(x) / om,
      -(2.0 * p.g / om2) * detail::one_minus_cos(x),
      (p.delta * p.delta / om2) * t + (4.0 * p.g * p.g / (om2 * om)) * std::sin(x),
  };
}

/// QFIM over (t, B).
inline QfimBlocks qfim_closed(const JcUnitaryParams& p, double t) {
  const auto a = generator_coeffs(p, t);
  QfimBlocks f;
  f.f_tt = 4.0 * p.g * p.g;
  f.f_tl = RVector::Constant(1, 2.0 * p.gamma_b * p.g * a.a_x);
  f.f_ll = RMatrix::Constant(1, 1, p.gamma_b * p.gamma_b * (a.a_x * a.a_x + a.a_y * a.a_y));
  return f;
}

/// QFIM over (t, Delta): the B blocks with gamma = 1.
inline QfimBlocks qfim_closed_detuning(const JcUnitaryParams& p, double t) {
  return qfim_closed({p.g, p.delta, 1.0}, t);
}

/// 4 g^2 A_y^2 / (A_x^2 + A_y^2), with F_eff = F_tt where both coefficients vanish.
inline double f_eff_closed(const JcUnitaryParams& p, double t) {
  p.validate();
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "f_eff_closed: t must be >= 0");
  const double ftt = 4.0 * p.g * p.g;
  const double om = p.rabi();
  const double x = om * t;
  // Common factor 2g/Omega^2 removed from both coefficients.
  const double s = std::sin(0.5 * x);
  const double ay = 2.0 * s * s;
  const double ax = p.delta * detail::x_minus_sin(x) / om;
  const double den = ax * ax + ay * ay;
  if (den == 0.0) return ftt;
  return ftt * (ay * ay) / den;
}

inline double retention_information(const JcUnitaryParams& p, double t) {
  return f_eff_closed(p, t) / (4.0 * p.g * p.g);
}

/// Leading-order short-time retention 1 / (1 + (Delta t / 3)^2).
inline double short_time_ratio(double delta, double t) {
  const double u = delta * t / 3.0;
  return 1.0 / (1.0 + u * u);
}

/// Largest |Delta| t keeping F_eff / F_tt >= R at short times.
inline double tolerance_bound(double retention) {
  if (!(retention > 0.0 && retention <= 1.0)) {
    throw Error(ErrorCode::DomainError, "tolerance_bound: retention must lie in (0, 1], got " +
                                            std::to_string(retention));
  }
  return 3.0 * std::sqrt(1.0 / retention - 1.0);
}

/// Survival fidelity |<e,0|U(t)|e,0>|^2.
inline double fidelity_unitary(const JcUnitaryParams& p, double t) {
  p.validate();
  const double om = p.rabi();
  const double s = std::sin(0.5 * om * t);
  return std::clamp(1.0 - (4.0 * p.g * p.g / (om * om)) * s * s, 0.0, 1.0);
}

inline CMatrix hamiltonian(const JcUnitaryParams& p) {
  return p.g * pauli::x() + (0.5 * p.delta) * pauli::z();
}

/// exp(-i H' t) = cos(Omega t/2) I - i sin(Omega t/2) n.tau, n = (2g, 0, Delta)/Omega.
inline CMatrix unitary_propagator(const JcUnitaryParams& p, double t) {
  p.validate();
  const double om = p.rabi();
  const CMatrix n_tau = (2.0 * p.g / om) * pauli::x() + (p.delta / om) * pauli::z();
  return std::cos(0.5 * om * t) * pauli::identity() - Complex(0.0, std::sin(0.5 * om * t)) * n_tau;
}

inline CVector initial_state() {
  CVector psi(2);
  psi << 1.0, 0.0;
  return psi;
}

/// arccos sup_{Delta in window} sqrt F(tau; Delta). The window is in detuning units.
inline double quotient_angle_unitary(const JcUnitaryParams& p_base, const CalibrationWindow& window, double tau) {
  p_base.validate();
  if (tau < 0.0) throw Error(ErrorCode::InvalidArgument, "quotient_angle_unitary: tau must be >= 0");
  const auto best = window_sup([&](double d) { return fidelity_unitary(p_base.with_delta(d), tau); }, window,
                               {p_base.delta});
  return angle_from_fidelity(best.value);
}

/// Same, with the window expressed in field offsets around the realized B (Delta = delta + gamma dB).
inline double quotient_angle_unitary_field(const JcUnitaryParams& p_base, const CalibrationWindow& field_offsets,
                                           double tau) {
  field_offsets.validate();
  const double a = p_base.delta + p_base.gamma_b * field_offsets.lo;
  const double b = p_base.delta + p_base.gamma_b * field_offsets.hi;
  return quotient_angle_unitary(p_base, {std::min(a, b), std::max(a, b), field_offsets.n_grid}, tau);
}

inline ProjectedSpeedSample speeds_unitary(const JcUnitaryParams& p, double t) {
  return make_speed_sample(t, 4.0 * p.g * p.g, f_eff_closed(p, t));
}

inline double v_bar_quo_unitary(const JcUnitaryParams& p, double tau) {
  return time_average([&](double t) { return 0.5 * std::sqrt(f_eff_closed(p, t)); }, tau);
}

inline QslCheck qsl_check_unitary(const JcUnitaryParams& p, const CalibrationWindow& window, double tau) {
  return make_qsl_check(tau, quotient_angle_unitary(p, window, tau), v_bar_quo_unitary(p, tau));
}

enum class RetentionConvention { Information, Speed };

inline double retention(const JcUnitaryParams& p, double t, RetentionConvention conv) {
  const double r = std::clamp(retention_information(p, t), 0.0, 1.0);
  return conv == RetentionConvention::Speed ? std::sqrt(r) : r;
}

/// Retention grid with rows indexed by Delta/g and columns by g tau.
inline RMatrix heatmap_retention(double g, const std::vector<double>& g_tau, const std::vector<double>& delta_over_g,
                                 RetentionConvention conv = RetentionConvention::Information, unsigned threads = 1) {
  if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "heatmap_retention: g must be > 0");
  for (double v : g_tau) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "heatmap_retention: bad g_tau value");
  }
  for (double v : delta_over_g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "heatmap_retention: bad delta_over_g value");
  }
  RMatrix out(static_cast<Eigen::Index>(delta_over_g.size()), static_cast<Eigen::Index>(g_tau.size()));
  parallel_for(delta_over_g.size(), threads, [&](std::size_t i) {
    const JcUnitaryParams p{g, delta_over_g[i] * g, 1.0};
    for (std::size_t j = 0; j < g_tau.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = retention(p, g_tau[j] / g, conv);
    }
  });
  return out;
}

/// The unitary sensor as a dissipation-free generator; lambda(0) is the field offset dB.
inline LindbladModel unitary_model(const JcUnitaryParams& p) {
  p.validate();
  LindbladModel m;
  m.dim = 2;
  m.n_nuisance = 1;
  m.hamiltonian = [p](const RVector& lambda) {
    return hamiltonian(p.with_delta(p.delta + p.gamma_b * lambda(0)));
  };
  m.d_hamiltonian = [p](const RVector&, Eigen::Index) -> CMatrix { return (0.5 * p.gamma_b) * pauli::z(); };
  return m;
}

}  // namespace qsl::jc
