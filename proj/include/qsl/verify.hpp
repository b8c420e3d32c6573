#pragma once

// Cross-oracle checks: closed forms against the GKSL engine, ODE sensitivities
// against finite differences, Schur-complement identities on random QFIMs, and
// the projected QSL inequality. Each check reports its worst error against a
// fixed tolerance.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qsl/bures.hpp"
#include "qsl/gksl.hpp"
#include "qsl/jc_dispersive.hpp"
#include "qsl/jc_unitary.hpp"
#include "qsl/linalg.hpp"
#include "qsl/numerics.hpp"

namespace qsl {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckResult> entries;
  bool overall = true;

  void add(CheckResult r) {
    overall = overall && r.pass;
    entries.push_back(std::move(r));
  }
};

struct VerifyOptions {
  double tolerance_scale = 1.0;  // multiplies every tolerance; the harness self-test shrinks it
};

namespace checks {

inline CheckResult finish(std::string name, double max_error, double tolerance) {
  const bool pass = std::isfinite(max_error) && max_error <= tolerance;
  return {std::move(name), max_error, tolerance, pass};
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

/// Reference open-system operating point: Delta = 8 g, kappa = 0.05 g, gamma_1 = 2 g.
inline jc::JcDispersiveParams reference_open_params() { return {}; }
inline constexpr double kReferenceTheta = 0.7853981633974483;  // pi / 4

// ---------------------------------------------------------------- unitary

inline CheckResult tolerance_table(double scale = 1.0) {
  const double expected[3][2] = {{0.99, 0.30}, {0.95, 0.69}, {0.90, 1.00}};
  double worst = 0.0;
  for (const auto& row : expected) worst = std::max(worst, std::abs(jc::tolerance_bound(row[0]) - row[1]));
  return finish("tolerance_table", worst, 0.005 * scale);
}

inline CheckResult resonance_identity(double g = 1.0, int n_points = 100, double scale = 1.0) {
  const jc::JcUnitaryParams p{g, 0.0, 1.0};
  const double ftt = 4.0 * g * g;
  double worst = 0.0;
  for (double t : linspace(0.0, 10.0 / g, n_points)) {
    worst = std::max(worst, std::abs(jc::f_eff_closed(p, t) - ftt));
    worst = std::max(worst, std::abs(schur_effective(jc::qfim_closed(p, t)) - ftt));
  }
  return finish("resonance_identity", worst / ftt, 1e-12 * scale);
}

/// Relative error of the closed-form F_eff against the engine's trajectory QFIM.
inline CheckResult unitary_closed_vs_engine(int n_delta = 10, int n_t = 10, double scale = 1.0) {
  const double g = 1.0;
  const auto times = linspace(0.1 / g, 3.0 / g, n_t);
  StepControl control;
  control.tolerance = 1e-10;
  double worst = 0.0;
  for (double dg : linspace(0.1, 2.0, n_delta)) {
    const jc::JcUnitaryParams p{g, dg * g, 1.0};
    const auto model = jc::unitary_model(p);
    const RVector lambda = RVector::Zero(1);
    const auto traj = propagate_with_sensitivity(model, lambda, projector(jc::initial_state()), times, control);
    const auto blocks = qfim_along_trajectory(model, lambda, traj);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double closed = jc::f_eff_closed(p, times[k]);
      const double numeric = schur_effective(blocks[k]);
      worst = std::max(worst, std::abs(numeric - closed) / std::max(std::abs(closed), 1e-300));
    }
  }
  return finish("unitary_closed_vs_engine", worst, 1e-5 * scale);
}

/// |F_eff/F_tt - 1/(1 + (Delta t/3)^2)| over |Omega t| < 0.5.
inline CheckResult short_time_law(int n_points = 50, double scale = 1.0) {
  const double g = 1.0;
  const std::vector<double> detunings{0.5, 1.0, 2.0, 4.0, 8.0};
  const int per = std::max(1, n_points / static_cast<int>(detunings.size()));
  double worst = 0.0;
  for (double dg : detunings) {
    const jc::JcUnitaryParams p{g, dg * g, 1.0};
    const double om = p.rabi();
    for (int k = 1; k <= per; ++k) {
      const double t = 0.499 * k / per / om;
      const double exact = jc::retention_information(p, t);
      worst = std::max(worst, std::abs(exact - jc::short_time_ratio(p.delta, t)));
    }
  }
  return finish("short_time_law", worst, 0.02 * scale);
}

// ---------------------------------------------------------------- engine

/// Largest Frobenius gap between the ODE sensitivity and a central difference
/// of two propagations at lambda +- h, on the same fixed internal step.
inline double sensitivity_fd_gap(const LindbladModel& model, const DensityMatrix& rho0,
                                 const std::vector<double>& times, double h = 1e-5) {
  const RVector lambda = RVector::Zero(model.n_nuisance);
  const auto central = propagate_with_sensitivity(model, lambda, rho0, times);
  StepControl fixed;
  fixed.max_step = central.step;
  fixed.adaptive = false;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < model.n_nuisance; ++a) {
    RVector up = lambda, down = lambda;
    up(a) += h;
    down(a) -= h;
    const auto tu = propagate_with_sensitivity(model, up, rho0, times, fixed);
    const auto td = propagate_with_sensitivity(model, down, rho0, times, fixed);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const CMatrix fd = (tu.states[k] - td.states[k]) / (2.0 * h);
      worst = std::max(worst, (fd - central.sensitivities[k][static_cast<std::size_t>(a)]).norm());
    }
  }
  return worst;
}

inline CheckResult sensitivity_fd_unitary(int n_t = 20, double scale = 1.0) {
  const jc::JcUnitaryParams p{1.0, 1.0, 1.0};
  const double gap =
      sensitivity_fd_gap(jc::unitary_model(p), projector(jc::initial_state()), linspace(0.15, 3.0, n_t));
  return finish("sensitivity_fd_unitary", gap, 1e-5 * scale);
}

inline CheckResult sensitivity_fd_open(int n_t = 20, double scale = 1.0) {
  const auto p = reference_open_params();
  const double gap = sensitivity_fd_gap(jc::cavity_model(p), projector(jc::initial_cavity_state(kReferenceTheta)),
                                        linspace(0.25, 5.0, n_t));
  return finish("sensitivity_fd_open", gap, 1e-5 * scale);
}

// ---------------------------------------------------------------- open model

inline SensitivityTrajectory reference_open_trajectory(const std::vector<double>& times) {
  const auto p = reference_open_params();
  StepControl control;
  control.tolerance = 1e-10;
  return propagate_with_sensitivity(jc::cavity_model(p), RVector::Zero(1),
                                    projector(jc::initial_cavity_state(kReferenceTheta)), times, control);
}

inline CheckResult bloch_vs_master(int n_t = 20, double scale = 1.0) {
  const auto p = reference_open_params();
  const auto times = linspace(0.1, 5.0, n_t);
  const auto traj = reference_open_trajectory(times);
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto closed = jc::bloch_state(p, kReferenceTheta, times[k]).s;
    worst = std::max(worst, (jc::bloch_from_density(traj.states[k]) - closed).cwiseAbs().maxCoeff());
  }
  return finish("bloch_vs_master", worst, 1e-7 * scale);
}

/// Entrywise relative gap; the mixed entry is measured against sqrt(F_tt F_BB).
inline double qfim_relative_gap(const QfimBlocks& a, const QfimBlocks& b) {
  const double tt = std::abs(a.f_tt - b.f_tt) / std::max(std::abs(b.f_tt), 1e-300);
  const double ll = std::abs(a.f_ll(0, 0) - b.f_ll(0, 0)) / std::max(std::abs(b.f_ll(0, 0)), 1e-300);
  const double tl = std::abs(a.f_tl(0) - b.f_tl(0)) / std::max(std::sqrt(std::abs(b.f_tt * b.f_ll(0, 0))), 1e-300);
  return std::max({tt, ll, tl});
}

inline CheckResult qfim_bloch_vs_engine(int n_t = 20, double scale = 1.0) {
  const auto p = reference_open_params();
  const auto times = linspace(0.1, 5.0, n_t);
  const auto traj = reference_open_trajectory(times);
  const auto blocks = qfim_along_trajectory(jc::cavity_model(p), RVector::Zero(1), traj);
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto closed = jc::qfim_bloch(p, kReferenceTheta, times[k]);
    worst = std::max(worst, qfim_relative_gap(blocks[k], closed));
    const double fe = jc::f_eff_open(p, kReferenceTheta, times[k]);
    worst = std::max(worst, std::abs(schur_effective(blocks[k]) - fe) / std::max(fe, 1e-300));
  }
  return finish("qfim_bloch_vs_engine", worst, 1e-5 * scale);
}

// ---------------------------------------------------------------- Schur

struct SchurSample {
  RMatrix full;
  bool invertible = true;
};

/// Random PSD QFIMs of size 2..5 as Q diag(s) Q^T with Q Haar-like orthogonal and
/// s log-uniform in [1e-2, 1e2], so conditioning stays bounded and a 1e-9 relative
/// comparison measures the algorithm rather than the input. Every fourth sample
/// has some eigenvalues set to zero.
inline std::vector<SchurSample> random_qfims(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_eig(-2.0, 2.0);
  std::uniform_int_distribution<int> size_dist(2, 5);
  std::vector<SchurSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int m = size_dist(rng);
    const bool deficient = k % 4 == 3;
    const int rank = deficient ? std::max(1, m - 1 - (k / 4) % (m - 1)) : m;
    RMatrix a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
    }
    const RMatrix q = Eigen::HouseholderQR<RMatrix>(a).householderQ();
    RVector s = RVector::Zero(m);
    for (int i = 0; i < rank; ++i) s(i) = std::pow(10.0, log_eig(rng));
    RMatrix f = q * s.asDiagonal() * q.transpose();
    out.push_back({0.5 * (f + f.transpose()), !deficient});
  }
  return out;
}

inline RMatrix random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < n; ++c) a(i, c) = normal(rng);
  }
  return Eigen::HouseholderQR<RMatrix>(a).householderQ();
}

/// Random Jacobian U diag(s) V^T with singular values in [0.5, 2].
inline RMatrix random_invertible(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> sv(0.5, 2.0);
  RVector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = sv(rng);
  return random_orthogonal(rng, n) * s.asDiagonal() * random_orthogonal(rng, n).transpose();
}

inline std::vector<CheckResult> schur_properties(std::uint64_t seed, int count = 1000, double scale = 1.0) {
  const auto samples = random_qfims(seed, count);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double bound_violation = 0.0;
  double reparam = 0.0;
  double profiled = 0.0;
  for (const auto& s : samples) {
    const auto blocks = QfimBlocks::from_full(s.full);
    const double fe = schur_effective(blocks);
    const double scale_tt = std::max(blocks.f_tt, 1e-300);
    bound_violation = std::max({bound_violation, -fe / scale_tt, (fe - blocks.f_tt) / scale_tt});
    if (!s.invertible) continue;

    const RMatrix j = random_invertible(rng, blocks.n_nuisance());
    QfimBlocks moved = blocks;
    moved.f_tl = j.transpose() * blocks.f_tl;
    moved.f_ll = j.transpose() * blocks.f_ll * j;
    moved.f_ll = 0.5 * (moved.f_ll + moved.f_ll.transpose());
    reparam = std::max(reparam, std::abs(schur_effective(moved) - fe) / fe);

    const double inv_tt = s.full.inverse()(0, 0);
    profiled = std::max(profiled, std::abs(1.0 / inv_tt - fe) / fe);
  }
  return {finish("schur_bounds", bound_violation, 1e-12 * scale),
          finish("schur_reparametrization", reparam, 1e-9 * scale),
          finish("schur_profiled_identity", profiled, 1e-9 * scale)};
}

// ---------------------------------------------------------------- QSL and contraction

inline const std::vector<double>& qsl_taus() {
  static const std::vector<double> taus{1.0, 2.0, 3.0, 4.0, 5.0};
  return taus;
}

/// Window half-widths as fractions of the nuisance scale (g for Delta, |B0| for B).
inline const std::vector<double>& qsl_half_widths() {
  static const std::vector<double> widths{0.0, 0.01, 0.02, 0.05, 0.10};
  return widths;
}

/// Largest violation max(0, bound - tau) over the grid.
inline CheckResult qsl_unitary(double scale = 1.0) {
  const jc::JcUnitaryParams p{1.0, 1.0, 1.0};
  double worst = 0.0;
  for (double tau : qsl_taus()) {
    for (double w : qsl_half_widths()) {
      const auto c = jc::qsl_check_unitary(p, CalibrationWindow::around(p.delta, w * p.g), tau);
      worst = std::max(worst, c.bound - tau);
    }
  }
  return finish("qsl_unitary", worst, 1e-9 * scale);
}

inline CheckResult qsl_open(double scale = 1.0) {
  const auto p = reference_open_params();
  double worst = 0.0;
  for (double tau : qsl_taus()) {
    for (double w : qsl_half_widths()) {
      const auto window = CalibrationWindow::around(p.b_field, w * std::abs(p.b_field));
      const auto c = jc::qsl_check_open(p, window, kReferenceTheta, tau);
      worst = std::max(worst, c.bound - tau);
    }
  }
  return finish("qsl_open", worst, 1e-9 * scale);
}

/// Theta_quo never exceeds the fixed-nuisance angle and never grows as the window widens.
inline CheckResult contraction_unitary(double scale = 1.0) {
  const std::vector<double> widths{0.0, 0.05, 0.1, 0.25, 0.5, 1.0};
  double worst = 0.0;
  for (double dg : {0.5, 1.0, 2.0}) {
    const jc::JcUnitaryParams p{1.0, dg, 1.0};
    for (double tau : {0.5, 1.0, 2.0, 3.0, 5.0}) {
      const double fixed = angle_from_fidelity(jc::fidelity_unitary(p, tau));
      double previous = std::numeric_limits<double>::infinity();
      for (double w : widths) {
        const double theta = jc::quotient_angle_unitary(p, CalibrationWindow::around(p.delta, w), tau);
        worst = std::max({worst, theta - fixed, theta - previous});
        previous = theta;
      }
    }
  }
  return finish("contraction_unitary", std::max(worst, 0.0), 1e-12 * scale);
}

inline CheckResult contraction_open(double scale = 1.0) {
  const std::vector<double> widths{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  const auto p = reference_open_params();
  double worst = 0.0;
  for (double theta0 : {kReferenceTheta, 0.4, 1.2}) {
    for (double tau : {0.5, 1.0, 2.0, 3.0, 5.0}) {
      const double fixed = angle_from_fidelity(jc::fidelity_open(p, theta0, tau));
      double previous = std::numeric_limits<double>::infinity();
      for (double w : widths) {
        const double theta =
            jc::quotient_angle_open(p, CalibrationWindow::around(p.b_field, w * std::abs(p.b_field)), theta0, tau);
        worst = std::max({worst, theta - fixed, theta - previous});
        previous = theta;
      }
    }
  }
  return finish("contraction_open", std::max(worst, 0.0), 1e-12 * scale);
}

// ---------------------------------------------------------------- heatmap contour

struct ContourPoint {
  double g_tau = 0.0;
  double delta_over_g = 0.0;
};

/// Level crossings of each heatmap column (fixed g tau) along the detuning axis,
/// located by linear interpolation between neighbouring grid rows.
inline std::vector<ContourPoint> contour_crossings(const RMatrix& retention, const std::vector<double>& g_tau,
                                                   const std::vector<double>& delta_over_g, double level) {
  std::vector<ContourPoint> out;
  for (Eigen::Index j = 0; j < retention.cols(); ++j) {
    for (Eigen::Index i = 0; i + 1 < retention.rows(); ++i) {
      const double a = retention(i, j) - level;
      const double b = retention(i + 1, j) - level;
      if ((a < 0.0) == (b < 0.0)) continue;
      const double f = a / (a - b);
      const double d0 = delta_over_g[static_cast<std::size_t>(i)];
      const double d1 = delta_over_g[static_cast<std::size_t>(i + 1)];
      out.push_back({g_tau[static_cast<std::size_t>(j)], d0 + f * (d1 - d0)});
    }
  }
  return out;
}

}  // namespace checks

/// Runs every check. Deterministic for a given seed.
inline VerifyReport verify_all(std::uint64_t seed, const VerifyOptions& options = {}) {
  const double s = options.tolerance_scale;
  VerifyReport report;
  report.add(checks::tolerance_table(s));
  report.add(checks::resonance_identity(1.0, 100, s));
  report.add(checks::short_time_law(50, s));
  report.add(checks::unitary_closed_vs_engine(10, 10, s));
  report.add(checks::sensitivity_fd_unitary(20, s));
  report.add(checks::sensitivity_fd_open(20, s));
  report.add(checks::bloch_vs_master(20, s));
  report.add(checks::qfim_bloch_vs_engine(20, s));
  for (auto& r : checks::schur_properties(seed, 1000, s)) report.add(std::move(r));
  report.add(checks::qsl_unitary(s));
  report.add(checks::qsl_open(s));
  report.add(checks::contraction_unitary(s));
  report.add(checks::contraction_open(s));
  return report;
}

}  // namespace qsl
