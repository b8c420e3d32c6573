#pragma once

// Open dispersive Jaynes-Cummings sensor. The atom is traced out, leaving a
// single cavity qubit {|0>, |1>} that rotates at omega_c'(B) and decays at
// kappa_eff(B):
//   omega_c'  = omega_c + chi <sigma_z>,  chi = g^2 / Delta
//   kappa_eff = kappa + gamma_1 (g / Delta)^2
// with Delta = omega_c - (omega_a + eta B). Note the sign: this is the opposite
// detuning convention from jc_unitary.hpp.
//
// Bloch components follow S_x = 2 Re rho_01, S_y = -2 Im rho_01,
// S_z = rho_11 - rho_00 (S_z = +1 is the one-photon state).

#include <array>
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

struct JcDispersiveParams {
  double g = 1.0;
  double omega_c = 10.0;
  double omega_a = 1.0;
  double eta = 1.0;
  double b_field = 1.0;
  double kappa = 0.05;
  double gamma_1 = 2.0;
  double gamma_phi = 0.0;  // carried for the hierarchy check only; the reduced model has no dephasing channel
  double sigma_z_mean = -1.0;
  double dispersive_threshold = 5.0;  // require |Delta| > threshold * g

  double detuning() const { return omega_c - (omega_a + eta * b_field); }

  JcDispersiveParams with_field(double b) const {
    JcDispersiveParams q = *this;
    q.b_field = b;
    return q;
  }

  void validate() const {
    const std::array<double, 10> all{g,     omega_c,   omega_a, eta,          b_field,
                                     kappa, gamma_1,   gamma_phi, sigma_z_mean, dispersive_threshold};
    for (double v : all) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "JcDispersiveParams: non-finite parameter");
    }
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "JcDispersiveParams: g must be > 0");
    if (kappa < 0.0 || gamma_1 < 0.0 || gamma_phi < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "JcDispersiveParams: rates must be >= 0");
    }
    if (sigma_z_mean < -1.0 || sigma_z_mean > 1.0) {
      throw Error(ErrorCode::InvalidArgument, "JcDispersiveParams: sigma_z_mean must lie in [-1, 1]");
    }
  }
};

struct EffectiveCavityParams {
  double delta = 0.0;
  double chi = 0.0;
  double omega_eff = 0.0;  // Omega(B) = omega_c'
  double kappa_eff = 0.0;  // Gamma(B)
  double d_omega = 0.0;    // Omega'(B)
  double d_kappa = 0.0;    // Gamma'(B)
};

inline void require_dispersive(const JcDispersiveParams& p) {
  const double d = p.detuning();
  if (!(std::abs(d) > p.dispersive_threshold * p.g)) {
    throw Error(ErrorCode::DispersiveViolation, "|Delta| = " + std::to_string(std::abs(d)) + " at B = " +
                                                    std::to_string(p.b_field) + " is not > " +
                                                    std::to_string(p.dispersive_threshold) + " g");
  }
}

inline EffectiveCavityParams effective_params(const JcDispersiveParams& p) {
  p.validate();
  require_dispersive(p);
  const double d = p.detuning();
  const double g2 = p.g * p.g;
  EffectiveCavityParams e;
  e.delta = d;
  e.chi = g2 / d;
  e.omega_eff = p.omega_c + e.chi * p.sigma_z_mean;
  e.kappa_eff = p.kappa + p.gamma_1 * g2 / (d * d);
  // Delta'(B) = -eta
  e.d_omega = p.sigma_z_mean * g2 * p.eta / (d * d);
  e.d_kappa = 2.0 * p.gamma_1 * g2 * p.eta / (d * d * d);
  return e;
}

using Vec3 = Eigen::Vector3d;

struct BlochState {
  Vec3 s = Vec3::Zero();
  Vec3 ds_dt = Vec3::Zero();
  Vec3 ds_db = Vec3::Zero();
  double purity_deficit = 0.0;  // 1 - |S|^2, evaluated without cancellation
};

inline void require_theta(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2)) {
    throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, pi/2]");
  }
}

inline BlochState bloch_state(const JcDispersiveParams& p, double theta, double t) {
  require_theta(theta);
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "bloch_state: t must be >= 0");
  const auto e = effective_params(p);
  const double w = e.omega_eff;
  const double k = e.kappa_eff;
  const double s2t = std::sin(2.0 * theta);
  const double sin2 = std::sin(theta) * std::sin(theta);
  const double half = std::exp(-0.5 * k * t);
  const double full = half * half;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);

  BlochState b;
  b.s = {s2t * c * half, -s2t * s * half, 2.0 * sin2 * full - 1.0};
  b.ds_dt = {-s2t * half * (w * s + 0.5 * k * c), -s2t * half * (w * c - 0.5 * k * s), -2.0 * k * sin2 * full};
  b.ds_db = {-s2t * half * (t * e.d_omega * s + 0.5 * t * e.d_kappa * c),
             -s2t * half * (t * e.d_omega * c - 0.5 * t * e.d_kappa * s), -2.0 * sin2 * t * e.d_kappa * full};
  // 1 - |S|^2 = 4 sin^4(theta) e^{-kt} (1 - e^{-kt})
  b.purity_deficit = 4.0 * sin2 * sin2 * full * (-std::expm1(-k * t));
  return b;
}

namespace detail {

/// Bloch-form QFI bilinear F(u, v) = u.v + (S.u)(S.v) / (1 - |S|^2). On the pure
/// surface the radial components are restricted to the support, which gives
/// u.v - (3/4)(S.u)(S.v), the same value the eigenbasis SLD route produces.
inline double bloch_metric(const BlochState& b, const Vec3& u, const Vec3& v) {
  const double su = b.s.dot(u);
  const double sv = b.s.dot(v);
  if (b.purity_deficit > 0.0) return u.dot(v) + su * sv / b.purity_deficit;
  if (b.s.squaredNorm() > 1.0 + 1e-9) {
    throw Error(ErrorCode::BlochBoundary, "Bloch vector outside the unit ball");
  }
  if (std::abs(su) < 1e-8 && std::abs(sv) < 1e-8) return u.dot(v);
  return u.dot(v) - 0.75 * su * sv;
}

}  // namespace detail

/// QFIM over (t, B) from the Bloch vector and its two tangents.
inline QfimBlocks qfim_bloch(const JcDispersiveParams& p, double theta, double t) {
  const auto b = bloch_state(p, theta, t);
  QfimBlocks f;
  f.f_tt = detail::bloch_metric(b, b.ds_dt, b.ds_dt);
  f.f_tl = RVector::Constant(1, detail::bloch_metric(b, b.ds_dt, b.ds_db));
  f.f_ll = RMatrix::Constant(1, 1, detail::bloch_metric(b, b.ds_db, b.ds_db));
  return f;
}

/// F_eff = F_tt - F_tB^2 / F_BB in a form that stays finite as t -> 0+:
///   [d |a x b|^2 + |y a - x b|^2] / [d |b|^2 + y^2]
/// with a = dS/dt, b = dS/dB, x = S.a, y = S.b, d = 1 - |S|^2.
/// Where dS/dB vanishes (t = 0 or eta = 0) this is F_tt by the pseudoinverse convention.
inline double f_eff_open(const JcDispersiveParams& p, double theta, double t) {
  const auto st = bloch_state(p, theta, t);
  const Vec3& a = st.ds_dt;
  const Vec3& b = st.ds_db;
  const double d = st.purity_deficit;
  const double x = st.s.dot(a);
  const double y = st.s.dot(b);
  const double den = d * b.squaredNorm() + y * y;
  if (!(den > 0.0)) return std::max(detail::bloch_metric(st, a, a), 0.0);
  const double num = d * a.cross(b).squaredNorm() + (y * a - x * b).squaredNorm();
  return std::max(num / den, 0.0);
}

inline ProjectedSpeedSample speeds_open(const JcDispersiveParams& p, double theta, double t) {
  const auto f = qfim_bloch(p, theta, t);
  const double eff = std::min(f_eff_open(p, theta, t), f.f_tt);
  return make_speed_sample(t, f.f_tt, eff);
}

inline double fidelity_open(const JcDispersiveParams& p, double theta, double t) {
  require_theta(theta);
  const auto e = effective_params(p);
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double decay = std::exp(-e.kappa_eff * t);
  const double value = c2 + s2 * s2 * decay - c2 * s2 * decay +
                       2.0 * c2 * s2 * std::exp(-0.5 * e.kappa_eff * t) * std::cos(e.omega_eff * t);
  return std::clamp(value, 0.0, 1.0);
}

inline CVector initial_cavity_state(double theta) {
  CVector psi(2);
  psi << std::cos(theta), std::sin(theta);
  return psi;
}

/// Exact reduced cavity state at time t.
inline DensityMatrix cavity_density(const JcDispersiveParams& p, double theta, double t) {
  require_theta(theta);
  const auto e = effective_params(p);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double decay = std::exp(-e.kappa_eff * t);
  const Complex coh = c * s * std::exp(-0.5 * e.kappa_eff * t) * std::polar(1.0, e.omega_eff * t);
  DensityMatrix rho(2, 2);
  rho << 1.0 - s * s * decay, coh, std::conj(coh), s * s * decay;
  return rho;
}

inline Vec3 bloch_from_density(const DensityMatrix& rho) {
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(1, 1) - rho(0, 0)).real()};
}

inline void require_dispersive_window(const JcDispersiveParams& p, const CalibrationWindow& window) {
  window.validate();
  // Delta is affine in B, so the endpoints decide validity (they also need the same sign).
  const double dl = p.with_field(window.lo).detuning();
  const double dh = p.with_field(window.hi).detuning();
  require_dispersive(p.with_field(window.lo));
  require_dispersive(p.with_field(window.hi));
  if ((dl > 0.0) != (dh > 0.0)) {
    throw Error(ErrorCode::DispersiveViolation, "calibration window crosses resonance");
  }
}

/// arccos sup_{B in window} sqrt F(tau; B). The window is in field units.
inline double quotient_angle_open(const JcDispersiveParams& p_base, const CalibrationWindow& window, double theta,
                                  double tau) {
  require_dispersive_window(p_base, window);
  require_theta(theta);
  if (tau < 0.0) throw Error(ErrorCode::InvalidArgument, "quotient_angle_open: tau must be >= 0");
  const auto best = window_sup([&](double b) { return fidelity_open(p_base.with_field(b), theta, tau); }, window,
                               {p_base.b_field});
  return angle_from_fidelity(best.value);
}

/// Time average of v_quo over [0, tau]. The t = 0 endpoint uses the right limit,
/// since F_eff(0) is set by convention rather than continuity.
inline double v_bar_quo_open(const JcDispersiveParams& p, double theta, double tau) {
  const double t_min = tau * 1e-12;
  return time_average([&](double t) { return 0.5 * std::sqrt(f_eff_open(p, theta, std::max(t, t_min))); }, tau);
}

inline QslCheck qsl_check_open(const JcDispersiveParams& p, const CalibrationWindow& window, double theta,
                               double tau) {
  return make_qsl_check(tau, quotient_angle_open(p, window, theta, tau), v_bar_quo_open(p, theta, tau));
}

/// Reduced cavity master equation as a generator; lambda(0) is the field offset dB.
inline LindbladModel cavity_model(const JcDispersiveParams& p) {
  p.validate();
  LindbladModel m;
  m.dim = 2;
  m.n_nuisance = 1;
  CMatrix lower = CMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;
  auto at = [p](const RVector& lambda) { return effective_params(p.with_field(p.b_field + lambda(0))); };
  m.hamiltonian = [at](const RVector& lambda) -> CMatrix {
    CMatrix h = CMatrix::Zero(2, 2);
    h(1, 1) = at(lambda).omega_eff;
    return h;
  };
  m.d_hamiltonian = [at](const RVector& lambda, Eigen::Index) -> CMatrix {
    CMatrix h = CMatrix::Zero(2, 2);
    h(1, 1) = at(lambda).d_omega;
    return h;
  };
  m.jumps = [at, lower](const RVector& lambda) {
    return std::vector<CMatrix>{std::sqrt(at(lambda).kappa_eff) * lower};
  };
  m.d_jumps = [at, lower](const RVector& lambda, Eigen::Index) {
    const auto e = at(lambda);
    const double scale = e.kappa_eff > 0.0 ? e.d_kappa / (2.0 * std::sqrt(e.kappa_eff)) : 0.0;
    return std::vector<CMatrix>{scale * lower};
  };
  return m;
}

/// Checks the rate hierarchy kappa (g/Delta)^2, gamma_phi (g/Delta)^2 << gamma_1
/// behind the reduced model, flagging ratios above 0.1.
inline std::vector<std::string> hierarchy_warnings(const JcDispersiveParams& p) {
  const auto e = effective_params(p);
  const double lam2 = (p.g / e.delta) * (p.g / e.delta);
  std::vector<std::string> out;
  if (p.kappa * lam2 > 0.1 * p.gamma_1) {
    out.push_back("kappa (g/Delta)^2 = " + std::to_string(p.kappa * lam2) + " is not << gamma_1 = " +
                  std::to_string(p.gamma_1));
  }
  if (p.gamma_phi * lam2 > 0.1 * p.gamma_1) {
    out.push_back("gamma_phi (g/Delta)^2 = " + std::to_string(p.gamma_phi * lam2) + " is not << gamma_1 = " +
                  std::to_string(p.gamma_1));
  }
  return out;
}

}  // namespace qsl::jc
