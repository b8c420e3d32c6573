#pragma once

// Scalar numerics shared by the case studies: sup over a calibration window,
// time averages, and a small fan-out helper for grid evaluations.

#include <boost/math/quadrature/trapezoidal.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qsl/errors.hpp"

namespace qsl {

/// Admissible nuisance interval sampled at n_grid points before refinement.
struct CalibrationWindow {
  double lo = 0.0;
  double hi = 0.0;
  int n_grid = 201;

  void validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw Error(ErrorCode::InvalidArgument, "CalibrationWindow: need finite lo <= hi");
    }
    if (n_grid < 2) throw Error(ErrorCode::InvalidArgument, "CalibrationWindow: n_grid must be >= 2");
  }

  bool degenerate() const { return hi == lo; }

  static CalibrationWindow around(double center, double half_width, int n_grid = 201) {
    return {center - half_width, center + half_width, n_grid};
  }
};

struct WindowMaximum {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

inline constexpr double kGoldenTolerance = 1e-10;

/// Golden-section search for a maximum of f on [a, b].
inline WindowMaximum golden_maximize(const std::function<double(double)>& f, double a, double b,
                                     double tol = kGoldenTolerance) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? WindowMaximum{c, fc} : WindowMaximum{d, fd};
}

/// sup of f over the window: grid scan, then golden-section refinement in the
/// bracket around every grid local maximum. Extra candidates inside the window
/// (e.g. the realized nuisance value) are always evaluated.
inline WindowMaximum window_sup(const std::function<double(double)>& f, const CalibrationWindow& window,
                                const std::vector<double>& candidates = {}) {
  window.validate();
  WindowMaximum best;
  auto consider = [&](double x, double v) {
    if (v > best.value) best = {x, v};
  };
  for (double x : candidates) {
    if (x >= window.lo && x <= window.hi) consider(x, f(x));
  }
  if (window.degenerate()) {
    consider(window.lo, f(window.lo));
    return best;
  }

  const int n = window.n_grid;
  const double h = (window.hi - window.lo) / (n - 1);
  std::vector<double> xs(n), vs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = (i == n - 1) ? window.hi : window.lo + i * h;
    vs[i] = f(xs[i]);
    consider(xs[i], vs[i]);
  }
  for (int i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || vs[i] >= vs[i - 1];
    const bool right_ok = i == n - 1 || vs[i] >= vs[i + 1];
    if (!(left_ok && right_ok)) continue;
    const double a = xs[std::max(i - 1, 0)];
    const double b = xs[std::min(i + 1, n - 1)];
    const auto refined = golden_maximize(f, a, b);
    consider(refined.x, refined.value);
  }
  return best;
}

inline constexpr double kAverageTolerance = 1e-6;

/// (1/tau) * integral_0^tau f(t) dt by adaptive trapezoid refinement.
inline double time_average(const std::function<double(double)>& f, double tau, double rel_tol = kAverageTolerance,
                           double* error_estimate = nullptr) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidArgument, "time_average: tau must be positive and finite");
  }
  double err = 0.0;
  double l1 = 0.0;
  const double integral = boost::math::quadrature::trapezoidal(f, 0.0, tau, rel_tol, 22, &err, &l1);
  if (err > 10.0 * rel_tol * std::max(l1, 1e-300) && l1 > 0.0) {
    throw Error(ErrorCode::StepTooLarge,
                "time_average: trapezoid refinement did not reach relative tolerance " + std::to_string(rel_tol));
  }
  if (error_estimate) *error_estimate = err / tau;
  return integral / tau;
}

/// Outcome of checking tau >= theta_quo / v_bar_quo.
struct QslCheck {
  double tau = 0.0;
  double theta_quo = 0.0;
  double v_bar_quo = 0.0;
  double bound = 0.0;
  bool satisfied = true;
  double slack() const { return tau - bound; }
};

inline constexpr double kQslSlack = 1e-9;

inline QslCheck make_qsl_check(double tau, double theta_quo, double v_bar_quo) {
  QslCheck out{tau, theta_quo, v_bar_quo, 0.0, true};
  if (v_bar_quo < 1e-14) {
    // Zero projected speed: the bound is vacuous unless there is nothing to traverse.
    out.bound = theta_quo > 1e-9 ? std::numeric_limits<double>::infinity() : 0.0;
    out.satisfied = true;
    return out;
  }
  out.bound = theta_quo / v_bar_quo;
  out.satisfied = tau >= out.bound - kQslSlack;
  return out;
}

/// Worker count from an explicit request, falling back to hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs fn(i) for i in [0, n) over `threads` workers with static interleaving.
/// The first exception thrown by any worker is rethrown on the calling thread.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qsl
