#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qsl/gksl.hpp"
#include "qsl/jc_dispersive.hpp"
#include "qsl/jc_unitary.hpp"
#include "support.hpp"

using namespace qsl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CMatrix lowering() {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

// Amplitude damping at rate gamma = lambda(0), plus a fixed splitting omega.
LindbladModel decay_model(double omega) {
  LindbladModel m;
  m.dim = 2;
  m.n_nuisance = 1;
  m.hamiltonian = [omega](const RVector&) -> CMatrix {
    CMatrix h = CMatrix::Zero(2, 2);
    h(1, 1) = omega;
    return h;
  };
  m.jumps = [](const RVector& l) { return std::vector<CMatrix>{std::sqrt(l(0)) * lowering()}; };
  m.d_hamiltonian = [](const RVector&, Eigen::Index) -> CMatrix { return CMatrix::Zero(2, 2); };
  m.d_jumps = [](const RVector& l, Eigen::Index) {
    return std::vector<CMatrix>{(0.5 / std::sqrt(l(0))) * lowering()};
  };
  return m;
}

// Random Hamiltonian H0 + lambda_a H_a with random jumps F0 + lambda_a F_a.
LindbladModel random_model(std::uint64_t seed, Eigen::Index dim, Eigen::Index m) {
  std::mt19937_64 rng(seed);
  const CMatrix h0 = testing::random_hermitian(rng, dim);
  std::vector<CMatrix> hs, f0, fs;
  for (Eigen::Index a = 0; a < m; ++a) hs.push_back(testing::random_hermitian(rng, dim));
  for (int k = 0; k < 2; ++k) f0.push_back(0.4 * testing::random_complex(rng, dim, dim));
  for (Eigen::Index a = 0; a < m; ++a) fs.push_back(0.2 * testing::random_complex(rng, dim, dim));
  LindbladModel model;
  model.dim = dim;
  model.n_nuisance = m;
  model.hamiltonian = [=](const RVector& l) {
    CMatrix h = h0;
    for (Eigen::Index a = 0; a < m; ++a) h += l(a) * hs[a];
    return h;
  };
  model.d_hamiltonian = [=](const RVector&, Eigen::Index a) { return hs[a]; };
  model.jumps = [=](const RVector& l) {
    std::vector<CMatrix> out = f0;
    for (Eigen::Index a = 0; a < m; ++a) out[0] += l(a) * fs[a];
    return out;
  };
  model.d_jumps = [=](const RVector&, Eigen::Index a) {
    return std::vector<CMatrix>{fs[a], CMatrix::Zero(dim, dim)};
  };
  return model;
}

}  // namespace

TEST_CASE("lindblad_apply examples", "[gksl]") {
  const auto m = decay_model(0.0);
  const RVector g = RVector::Constant(1, 0.7);

  CMatrix excited = CMatrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  const CMatrix l = lindblad_apply(m, g, excited);
  CHECK_THAT(l(0, 0).real(), WithinAbs(0.7, 1e-15));
  CHECK_THAT(l(1, 1).real(), WithinAbs(-0.7, 1e-15));
  CHECK(std::abs(l(0, 1)) < 1e-15);

  CMatrix ground = CMatrix::Zero(2, 2);
  ground(0, 0) = 1.0;
  CHECK(lindblad_apply(m, g, ground).norm() < 1e-15);

  // Coherences decay at gamma / 2.
  const CMatrix plus = 0.5 * CMatrix::Ones(2, 2);
  CHECK_THAT(lindblad_apply(m, g, plus)(0, 1).real(), WithinAbs(-0.25 * 0.7, 1e-15));

  // Pure Hamiltonian: -i[H, rho].
  LindbladModel u;
  u.dim = 2;
  u.n_nuisance = 0;
  u.hamiltonian = [](const RVector&) { return pauli::z(); };
  const CMatrix lu = lindblad_apply(u, RVector(0), plus);
  CHECK_THAT(lu(0, 1).imag(), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(lu(1, 0).imag(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("generator output is traceless and Hermitian", "[gksl][property]") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(seed % 4);
    const auto model = random_model(seed, dim, 2);
    const RVector l = RVector::Constant(2, 0.3);
    const CMatrix rho = testing::random_density(rng, dim);
    const CMatrix out = lindblad_apply(model, l, rho);
    CHECK(std::abs(out.trace()) < 1e-12);
    CHECK(hermiticity_defect(out) < 1e-12);
    const CMatrix x = testing::random_tangent(rng, dim);
    const CMatrix s = sensitivity_rhs(model, l, 1, rho, x);
    CHECK(std::abs(s.trace()) < 1e-12);
    CHECK(hermiticity_defect(s) < 1e-12);
  }
}

TEST_CASE("sensitivity_rhs examples", "[gksl]") {
  const auto m = decay_model(0.0);
  const RVector g = RVector::Constant(1, 0.7);
  CMatrix excited = CMatrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  // d/dgamma of L[|1><1|] = |0><0| - |1><1|, with rho' = 0.
  const CMatrix s = sensitivity_rhs(m, g, 0, excited, CMatrix::Zero(2, 2));
  CHECK_THAT(s(0, 0).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(s(1, 1).real(), WithinAbs(-1.0, 1e-14));
  CHECK_THROWS_AS(sensitivity_rhs(m, g, 1, excited, CMatrix::Zero(2, 2)), Error);
}

TEST_CASE("dimension mismatches are reported", "[gksl]") {
  const auto m = decay_model(0.0);
  CHECK_THROWS_AS(lindblad_apply(m, RVector::Constant(2, 0.1), CMatrix::Identity(2, 2) / 2.0), Error);
  CHECK_THROWS_AS(lindblad_apply(m, RVector::Constant(1, 0.1), CMatrix::Identity(3, 3) / 3.0), Error);
  try {
    lindblad_apply(m, RVector::Constant(2, 0.1), CMatrix::Identity(2, 2) / 2.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(propagate_with_sensitivity(m, RVector::Constant(1, 0.1), CMatrix::Identity(3, 3) / 3.0, {0.0, 1.0}),
                  Error);
}

TEST_CASE("zero generator leaves the state constant", "[gksl]") {
  LindbladModel zero;
  zero.dim = 3;
  zero.n_nuisance = 1;
  zero.hamiltonian = [](const RVector&) -> CMatrix { return CMatrix::Zero(3, 3); };
  zero.d_hamiltonian = [](const RVector&, Eigen::Index) -> CMatrix { return CMatrix::Zero(3, 3); };
  std::mt19937_64 rng(7);
  const CMatrix rho = testing::random_density(rng, 3);
  const auto traj = propagate_with_sensitivity(zero, RVector::Zero(1), rho, {0.0, 0.5, 2.0});
  for (const auto& s : traj.states) CHECK((s - rho).norm() < 1e-14);
  for (const auto& p : traj.sensitivities) CHECK(p[0].norm() == 0.0);
}

TEST_CASE("amplitude damping trajectory matches the closed form", "[gksl]") {
  const double gamma = 0.8;
  const double omega = 3.0;
  const auto m = decay_model(omega);
  const CMatrix plus = 0.5 * CMatrix::Ones(2, 2);
  std::vector<double> times{0.0, 0.3, 1.0, 2.5};
  const auto traj = propagate_with_sensitivity(m, RVector::Constant(1, gamma), plus, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const CMatrix& r = traj.states[k];
    CHECK_THAT(r(1, 1).real(), WithinAbs(0.5 * std::exp(-gamma * t), 1e-8));
    const Complex coh = 0.5 * std::exp(-0.5 * gamma * t) * std::polar(1.0, omega * t);
    CHECK(std::abs(r(0, 1) - coh) < 1e-8);
    // d/dgamma of the excited population.
    CHECK_THAT(traj.sensitivities[k][0](1, 1).real(), WithinAbs(-0.5 * t * std::exp(-gamma * t), 1e-8));
    CHECK(std::abs(r.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("unitary JC engine reproduces the propagator", "[gksl][jc]") {
  const jc::JcUnitaryParams p{1.0, 1.7, 1.0};
  const auto model = jc::unitary_model(p);
  const CMatrix rho0 = projector(jc::initial_state());
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.4 * k);
  const auto traj = propagate_with_sensitivity(model, RVector::Zero(1), rho0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CMatrix u = jc::unitary_propagator(p, times[k]);
    CHECK((traj.states[k] - u * rho0 * u.adjoint()).norm() < 1e-8);
    const double h = 1e-5;
    const CMatrix up = jc::unitary_propagator(p.with_delta(p.delta + h), times[k]);
    const CMatrix dn = jc::unitary_propagator(p.with_delta(p.delta - h), times[k]);
    const CMatrix fd = (up * rho0 * up.adjoint() - dn * rho0 * dn.adjoint()) / (2.0 * h);
    CHECK((traj.sensitivities[k][0] - fd).norm() < 1e-7);
  }
}

TEST_CASE("sensitivities match central finite differences on random models", "[gksl][property]") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(seed + 55);
    const auto model = random_model(seed, 3, 2);
    const RVector l = RVector::Constant(2, 0.2);
    const CMatrix rho0 = testing::random_density(rng, 3);
    const std::vector<double> times{0.5, 1.0};
    const auto traj = propagate_with_sensitivity(model, l, rho0, times);
    for (Eigen::Index a = 0; a < 2; ++a) {
      const double h = 1e-5;
      RVector up = l, dn = l;
      up(a) += h;
      dn(a) -= h;
      StepControl fixed;
      fixed.adaptive = false;
      fixed.max_step = traj.step;
      const auto tu = propagate_with_sensitivity(model, up, rho0, times, fixed);
      const auto td = propagate_with_sensitivity(model, dn, rho0, times, fixed);
      for (std::size_t k = 0; k < times.size(); ++k) {
        const CMatrix fd = (tu.states[k] - td.states[k]) / (2.0 * h);
        CHECK((traj.sensitivities[k][a] - fd).norm() < 1e-5);
      }
    }
  }
}

TEST_CASE("QFIM along the unitary trajectory", "[gksl][jc]") {
  const jc::JcUnitaryParams p{1.3, 0.9, 1.0};
  const auto model = jc::unitary_model(p);
  const std::vector<double> times{0.0, 0.5, 1.5, 3.0};
  const auto traj = propagate_with_sensitivity(model, RVector::Zero(1), projector(jc::initial_state()), times);
  const auto blocks = qfim_along_trajectory(model, RVector::Zero(1), traj);
  REQUIRE(blocks.size() == times.size());
  CHECK(blocks[0].f_ll(0, 0) == 0.0);
  CHECK(blocks[0].f_tl(0) == 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK_THAT(blocks[k].f_tt, WithinRel(4.0 * p.g * p.g, 1e-6));
    const auto closed = jc::qfim_closed(p, times[k]);
    CHECK_THAT(blocks[k].f_ll(0, 0), WithinAbs(closed.f_ll(0, 0), 1e-6));
    CHECK_THAT(blocks[k].f_tl(0), WithinAbs(closed.f_tl(0), 1e-6));
  }
}

TEST_CASE("analytic generator derivatives agree with finite differences", "[gksl]") {
  CHECK(derivative_mismatch(jc::unitary_model({1.0, 0.4, 2.0}), RVector::Constant(1, 0.1)) < 1e-6);
  CHECK(derivative_mismatch(jc::cavity_model(jc::JcDispersiveParams{}), RVector::Zero(1)) < 1e-6);
  CHECK(derivative_mismatch(random_model(3, 4, 2), RVector::Constant(2, -0.3)) < 1e-6);
}

TEST_CASE("step control failures", "[gksl]") {
  const auto m = decay_model(50.0);
  StepControl tight;
  tight.max_step = 0.5;
  tight.tolerance = 1e-30;
  tight.max_halvings = 2;
  const CMatrix plus = 0.5 * CMatrix::Ones(2, 2);
  CHECK_THROWS_AS(propagate_with_sensitivity(m, RVector::Constant(1, 0.5), plus, {1.0}, tight), Error);
  CHECK_THROWS_AS(propagate_with_sensitivity(m, RVector::Constant(1, 0.5), plus, {1.0, 0.5}), Error);
}
