#pragma once

// Parameterized GKSL generators, their nuisance-sensitivity equations, and joint
// RK4 propagation of (rho, rho'_1, ..., rho'_{m-1}).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsl/bures.hpp"
#include "qsl/errors.hpp"
#include "qsl/linalg.hpp"

namespace qsl {

/// GKSL generator L_lambda[rho] = -i[H, rho] + sum_k D[F_k] rho with its
/// derivatives along each nuisance coordinate. Callbacks must be reentrant.
struct LindbladModel {
  Eigen::Index dim = 0;
  Eigen::Index n_nuisance = 0;
  std::function<CMatrix(const RVector&)> hamiltonian;
  std::function<std::vector<CMatrix>(const RVector&)> jumps;
  std::function<CMatrix(const RVector&, Eigen::Index)> d_hamiltonian;
  std::function<std::vector<CMatrix>(const RVector&, Eigen::Index)> d_jumps;
};

/// The generator data evaluated once at a fixed lambda.
class FrozenGenerator {
 public:
  FrozenGenerator(const LindbladModel& model, const RVector& lambda) : dim_(model.dim) {
    if (lambda.size() != model.n_nuisance) {
      throw Error(ErrorCode::DimensionMismatch,
                  "LindbladModel: expected " + std::to_string(model.n_nuisance) +
                      " nuisance values, got " + std::to_string(lambda.size()));
    }
    h_ = model.hamiltonian(lambda);
    check_shape(h_, "hamiltonian");
    jumps_ = model.jumps ? model.jumps(lambda) : std::vector<CMatrix>{};
    for (const auto& f : jumps_) {
      check_shape(f, "jump operator");
      decay_.push_back(f.adjoint() * f);
    }
    for (Eigen::Index a = 0; a < model.n_nuisance; ++a) {
      dh_.push_back(model.d_hamiltonian ? model.d_hamiltonian(lambda, a) : CMatrix::Zero(dim_, dim_));
      check_shape(dh_.back(), "hamiltonian derivative");
      std::vector<CMatrix> dj = model.d_jumps ? model.d_jumps(lambda, a) : std::vector<CMatrix>{};
      if (dj.empty()) dj.assign(jumps_.size(), CMatrix::Zero(dim_, dim_));
      if (dj.size() != jumps_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "LindbladModel: d_jumps count differs from jumps");
      }
      for (const auto& m : dj) check_shape(m, "jump derivative");
      djumps_.push_back(std::move(dj));
    }
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index n_nuisance() const { return static_cast<Eigen::Index>(dh_.size()); }

  CMatrix apply(const CMatrix& rho) const {
    check_shape(rho, "state");
    const Complex i(0.0, 1.0);
    CMatrix out = -i * commutator(h_, rho);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      out += jumps_[k] * rho * jumps_[k].adjoint() - 0.5 * anticommutator(decay_[k], rho);
    }
    return out;
  }

  /// (d_alpha L)[rho], product rule applied to each dissipator.
  CMatrix apply_derivative(Eigen::Index alpha, const CMatrix& rho) const {
    check_shape(rho, "state");
    const Complex i(0.0, 1.0);
    CMatrix out = -i * commutator(dh_[alpha], rho);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const CMatrix& f = jumps_[k];
      const CMatrix& df = djumps_[alpha][k];
      const CMatrix d_decay = df.adjoint() * f + f.adjoint() * df;
      out += df * rho * f.adjoint() + f * rho * df.adjoint() - 0.5 * anticommutator(d_decay, rho);
    }
    return out;
  }

 private:
  void check_shape(const CMatrix& m, const char* what) const {
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string("LindbladModel: ") + what + " is " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected dim " + std::to_string(dim_));
    }
  }

  Eigen::Index dim_;
  CMatrix h_;
  std::vector<CMatrix> jumps_;
  std::vector<CMatrix> decay_;
  std::vector<CMatrix> dh_;
  std::vector<std::vector<CMatrix>> djumps_;
};

inline TangentMatrix lindblad_apply(const LindbladModel& model, const RVector& lambda, const DensityMatrix& rho) {
  return FrozenGenerator(model, lambda).apply(rho);
}

/// Right-hand side of d/dt rho'_alpha = (d_alpha L)[rho] + L[rho'_alpha].
inline TangentMatrix sensitivity_rhs(const LindbladModel& model, const RVector& lambda, Eigen::Index alpha,
                                     const DensityMatrix& rho, const TangentMatrix& rho_prime) {
  if (alpha < 0 || alpha >= model.n_nuisance) {
    throw Error(ErrorCode::DimensionMismatch, "sensitivity_rhs: nuisance index out of range");
  }
  const FrozenGenerator gen(model, lambda);
  return gen.apply_derivative(alpha, rho) + gen.apply(rho_prime);
}

/// Largest relative mismatch between the model's analytic nuisance derivatives
/// and central finite differences of H and F_k.
inline double derivative_mismatch(const LindbladModel& model, const RVector& lambda, double step = 1e-6) {
  double worst = 0.0;
  auto rel = [](const CMatrix& analytic, const CMatrix& numeric) {
    const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
    return (analytic - numeric).norm() / scale;
  };
  for (Eigen::Index a = 0; a < model.n_nuisance; ++a) {
    const double h = step * std::max(1.0, std::abs(lambda(a)));
    RVector up = lambda, down = lambda;
    up(a) += h;
    down(a) -= h;
    const CMatrix dh_num = (model.hamiltonian(up) - model.hamiltonian(down)) / (2.0 * h);
    worst = std::max(worst, rel(model.d_hamiltonian(lambda, a), dh_num));
    if (model.jumps) {
      const auto ju = model.jumps(up);
      const auto jd = model.jumps(down);
      const auto dj = model.d_jumps(lambda, a);
      for (std::size_t k = 0; k < ju.size(); ++k) {
        worst = std::max(worst, rel(dj[k], (ju[k] - jd[k]) / (2.0 * h)));
      }
    }
  }
  return worst;
}

struct StepControl {
  double max_step = 1e-2;    // initial internal step
  double tolerance = 1e-7;   // Frobenius change allowed between step h and h/2
  int max_halvings = 16;
  bool adaptive = true;      // false: single pass at max_step, no convergence check
  std::vector<TangentMatrix> initial_sensitivities;  // empty: rho'_alpha(0) = 0
};

struct SensitivityTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<std::vector<TangentMatrix>> sensitivities;  // [time][alpha]
  double step = 0.0;          // internal step actually used
  double convergence = 0.0;   // last step-halving change (0 when not adaptive)
};

namespace detail {

struct JointState {
  CMatrix rho;
  std::vector<CMatrix> primes;
};

inline JointState joint_rhs(const FrozenGenerator& gen, const JointState& s) {
  JointState out{gen.apply(s.rho), {}};
  out.primes.reserve(s.primes.size());
  for (std::size_t a = 0; a < s.primes.size(); ++a) {
    out.primes.push_back(gen.apply_derivative(static_cast<Eigen::Index>(a), s.rho) + gen.apply(s.primes[a]));
  }
  return out;
}

inline JointState axpy(const JointState& x, double h, const JointState& k) {
  JointState out{x.rho + h * k.rho, {}};
  out.primes.reserve(x.primes.size());
  for (std::size_t a = 0; a < x.primes.size(); ++a) out.primes.push_back(x.primes[a] + h * k.primes[a]);
  return out;
}

inline void rk4_step(const FrozenGenerator& gen, JointState& s, double h) {
  const JointState k1 = joint_rhs(gen, s);
  const JointState k2 = joint_rhs(gen, axpy(s, 0.5 * h, k1));
  const JointState k3 = joint_rhs(gen, axpy(s, 0.5 * h, k2));
  const JointState k4 = joint_rhs(gen, axpy(s, h, k3));
  s.rho += (h / 6.0) * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
  for (std::size_t a = 0; a < s.primes.size(); ++a) {
    s.primes[a] += (h / 6.0) * (k1.primes[a] + 2.0 * k2.primes[a] + 2.0 * k3.primes[a] + k4.primes[a]);
  }
}

inline SensitivityTrajectory integrate_fixed(const FrozenGenerator& gen, const DensityMatrix& rho0,
                                             const std::vector<TangentMatrix>& primes0,
                                             const std::vector<double>& t_grid, double step) {
  SensitivityTrajectory traj;
  traj.step = step;
  JointState s{rho0, primes0};
  double t = 0.0;
  for (const double target : t_grid) {
    const double span = target - t;
    if (span > 0.0) {
      const auto n = static_cast<long>(std::ceil(span / step - 1e-12));
      const double h = span / static_cast<double>(std::max(n, 1L));
      for (long k = 0; k < std::max(n, 1L); ++k) rk4_step(gen, s, h);
      t = target;
    }
    traj.times.push_back(target);
    traj.states.push_back(hermitian_part(s.rho));
    std::vector<CMatrix> primes;
    for (const auto& p : s.primes) primes.push_back(hermitian_part(p));
    traj.sensitivities.push_back(std::move(primes));
  }
  return traj;
}

inline double max_difference(const SensitivityTrajectory& a, const SensitivityTrajectory& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    worst = std::max(worst, (a.states[k] - b.states[k]).norm());
    for (std::size_t al = 0; al < a.sensitivities[k].size(); ++al) {
      worst = std::max(worst, (a.sensitivities[k][al] - b.sensitivities[k][al]).norm());
    }
  }
  return worst;
}

}  // namespace detail

/// Joint RK4 integration of the state and its nuisance sensitivities. With
/// adaptive control the internal step is halved until successive passes agree
/// to within control.tolerance on every output.
inline SensitivityTrajectory propagate_with_sensitivity(const LindbladModel& model, const RVector& lambda,
                                                        const DensityMatrix& rho0, const std::vector<double>& t_grid,
                                                        const StepControl& control = {}) {
  const FrozenGenerator gen(model, lambda);
  if (rho0.rows() != model.dim || rho0.cols() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "propagate_with_sensitivity: initial state shape");
  }
  detail::require_density(rho0, "propagate_with_sensitivity");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (t_grid[k] < 0.0 || (k > 0 && t_grid[k] < t_grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "propagate_with_sensitivity: time grid must ascend from 0");
    }
  }
  if (!(control.max_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "propagate_with_sensitivity: max_step must be positive");
  }

  std::vector<CMatrix> primes0 = control.initial_sensitivities;
  if (primes0.empty()) primes0.assign(static_cast<std::size_t>(model.n_nuisance), CMatrix::Zero(model.dim, model.dim));
  if (static_cast<Eigen::Index>(primes0.size()) != model.n_nuisance) {
    throw Error(ErrorCode::DimensionMismatch, "propagate_with_sensitivity: initial sensitivity count");
  }

  double step = control.max_step;
  SensitivityTrajectory traj = detail::integrate_fixed(gen, rho0, primes0, t_grid, step);
  if (control.adaptive) {
    bool converged = false;
    for (int k = 0; k < control.max_halvings; ++k) {
      step *= 0.5;
      SensitivityTrajectory finer = detail::integrate_fixed(gen, rho0, primes0, t_grid, step);
      const double change = detail::max_difference(traj, finer);
      traj = std::move(finer);
      traj.convergence = change;
      if (change < control.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorCode::StepTooLarge, "propagate_with_sensitivity: no convergence after " +
                                               std::to_string(control.max_halvings) + " step halvings");
    }
  }

  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double trace_drift = std::abs(traj.states[k].trace() - Complex(1.0, 0.0));
    if (trace_drift > 1e-6) {
      throw Error(ErrorCode::StepTooLarge, "propagate_with_sensitivity: trace drift " + std::to_string(trace_drift));
    }
  }
  return traj;
}

/// QFIM blocks at every trajectory point, using d_t rho = L[rho(t)] and rho'_alpha(t).
inline std::vector<QfimBlocks> qfim_along_trajectory(const LindbladModel& model, const RVector& lambda,
                                                     const SensitivityTrajectory& traj,
                                                     double support_cutoff = kDefaultSupportCutoff) {
  const FrozenGenerator gen(model, lambda);
  std::vector<QfimBlocks> out;
  out.reserve(traj.states.size());
  std::vector<TangentMatrix> tangents;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    tangents.clear();
    tangents.push_back(hermitian_part(gen.apply(traj.states[k])));
    for (const auto& p : traj.sensitivities[k]) tangents.push_back(p);
    out.push_back(qfim_from_tangents(traj.states[k], tangents, support_cutoff));
  }
  return out;
}

}  // namespace qsl
