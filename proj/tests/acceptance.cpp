// Acceptance suite: one PASS/FAIL line per primary criterion. Tolerances and
// runtime budgets are fixed here; the exit status is nonzero if any line fails.

#include <fmt/format.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qsl/qsl.hpp"

namespace {

using qsl::CheckResult;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome from_checks(const std::vector<CheckResult>& results) {
  Outcome o;
  for (const auto& r : results) {
    o.pass = o.pass && r.pass;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += fmt::format("{} {:.3g} <= {:.3g}", r.name, r.max_error, r.tolerance);
  }
  return o;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = elapsed < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  fmt::print("{} {:>2} {} [{}; {:.2f} s of {:.0f} s]\n", pass ? "PASS" : "FAIL", id, title, o.detail, elapsed,
             budget_s);
  std::fflush(stdout);
}

// Criterion 10: heatmap through the scenario runner, contour read back from the CSV.
Outcome heatmap_contour() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qsl_acceptance_heatmap";
  fs::remove_all(dir);
  const auto cfg = qsl::parse_config("mode = unitary-heatmap\ng = 1\n");
  const auto start = Clock::now();
  const auto run = qsl::run_scenario(cfg, {dir, qsl::resolve_threads(0)});
  const double emit_s = std::chrono::duration<double>(Clock::now() - start).count();

  std::ifstream in(run.csv_path);
  std::string line;
  std::getline(in, line);
  if (line != qsl::schema::kHeatmap) return {false, "unexpected header '" + line + "'"};
  std::map<double, std::size_t> tau_index, delta_index;
  std::vector<std::array<double, 3>> cells;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::array<double, 3> c{};
    std::string field;
    for (double& v : c) {
      std::getline(ss, field, ',');
      v = std::stod(field);
    }
    tau_index.emplace(c[0], 0);
    delta_index.emplace(c[1], 0);
    cells.push_back(c);
  }
  if (tau_index.size() != 200 || delta_index.size() != 200 || cells.size() != 40000) {
    return {false, fmt::format("grid is {}x{} with {} rows", delta_index.size(), tau_index.size(), cells.size())};
  }
  std::vector<double> g_tau, delta_over_g;
  for (auto& [v, i] : tau_index) {
    i = g_tau.size();
    g_tau.push_back(v);
  }
  for (auto& [v, i] : delta_index) {
    i = delta_over_g.size();
    delta_over_g.push_back(v);
  }
  qsl::RMatrix r(200, 200);
  for (const auto& c : cells) r(delta_index[c[1]], tau_index[c[0]]) = c[2];

  const auto crossings = qsl::checks::contour_crossings(r, g_tau, delta_over_g, 0.99);
  double lo = INFINITY, hi = -INFINITY;
  std::size_t used = 0;
  for (const auto& p : crossings) {
    if (p.g_tau > 0.5) continue;
    const double product = std::abs(p.delta_over_g) * p.g_tau;
    lo = std::min(lo, product);
    hi = std::max(hi, product);
    ++used;
  }
  const bool ok = emit_s < 60.0 && used > 0 && lo >= 0.25 && hi <= 0.35;
  return {ok, fmt::format("emitted in {:.2f} s; {} crossings with g tau <= 0.5, |Delta| tau in [{:.4f}, {:.4f}] "
                          "(need [0.25, 0.35])",
                          emit_s, used, lo, hi)};
}

}  // namespace

int main() {
  namespace c = qsl::checks;
  const std::uint64_t seed = 0;

  criterion(1, "tolerance table", 1.0, [] { return from_checks({c::tolerance_table()}); });
  criterion(2, "resonance identity", 1.0, [] { return from_checks({c::resonance_identity(1.0, 100)}); });
  criterion(3, "closed form vs engine (unitary)", 10.0, [] { return from_checks({c::unitary_closed_vs_engine(10, 10)}); });
  criterion(4, "short-time law", 1.0, [] { return from_checks({c::short_time_law(50)}); });
  criterion(5, "sensitivity ODE vs finite differences", 10.0,
            [] { return from_checks({c::sensitivity_fd_unitary(20), c::sensitivity_fd_open(20)}); });
  criterion(6, "open-model consistency", 10.0,
            [] { return from_checks({c::bloch_vs_master(20), c::qfim_bloch_vs_engine(20)}); });
  criterion(7, "Schur complement properties", 5.0, [&] { return from_checks(c::schur_properties(seed, 1000)); });
  criterion(8, "projected QSL inequality", 30.0, [] { return from_checks({c::qsl_unitary(), c::qsl_open()}); });
  criterion(9, "quotient-angle contraction", 10.0,
            [] { return from_checks({c::contraction_unitary(), c::contraction_open()}); });
  criterion(10, "retention heatmap and R = 0.99 contour", 60.0, heatmap_contour);

  fmt::print("{}: {} of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
