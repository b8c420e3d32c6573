#include <catch_amalgamated.hpp>

#include <set>
#include <string>

#include "qsl/verify.hpp"

using namespace qsl;
using Catch::Matchers::WithinAbs;

TEST_CASE("every check passes at the default seed", "[verify]") {
  const auto report = verify_all(0);
  for (const auto& e : report.entries) {
    INFO(e.name << " max_error=" << e.max_error << " tolerance=" << e.tolerance);
    CHECK(e.pass);
  }
  CHECK(report.overall);
  std::set<std::string> names;
  for (const auto& e : report.entries) names.insert(e.name);
  CHECK(names.size() == report.entries.size());
  for (const char* n : {"tolerance_table", "resonance_identity", "short_time_law", "unitary_closed_vs_engine",
                        "sensitivity_fd_unitary", "sensitivity_fd_open", "bloch_vs_master", "qfim_bloch_vs_engine",
                        "schur_bounds", "schur_reparametrization", "schur_profiled_identity", "qsl_unitary", "qsl_open",
                        "contraction_unitary", "contraction_open"}) {
    CHECK(names.contains(n));
  }
}

TEST_CASE("randomized Schur checks hold for other seeds", "[verify][property]") {
  for (std::uint64_t seed : {1u, 2u, 3u, 12345u}) {
    for (const auto& e : checks::schur_properties(seed)) {
      INFO("seed " << seed << ": " << e.name << " max_error=" << e.max_error);
      CHECK(e.pass);
    }
  }
}

TEST_CASE("reports are deterministic for a seed", "[verify]") {
  const auto a = verify_all(5);
  const auto b = verify_all(5);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].name == b.entries[i].name);
    CHECK(a.entries[i].max_error == b.entries[i].max_error);
  }
}

TEST_CASE("a shrunken tolerance produces named failures", "[verify]") {
  const auto report = verify_all(0, {1e-30});
  CHECK_FALSE(report.overall);
  std::set<std::string> failing;
  for (const auto& e : report.entries) {
    if (!e.pass) failing.insert(e.name);
  }
  CHECK(failing.contains("tolerance_table"));
  CHECK(failing.contains("unitary_closed_vs_engine"));
  CHECK(failing.contains("sensitivity_fd_open"));
}

TEST_CASE("finish rejects non-finite errors", "[verify]") {
  CHECK(checks::finish("x", 0.5, 1.0).pass);
  CHECK_FALSE(checks::finish("x", 2.0, 1.0).pass);
  CHECK_FALSE(checks::finish("x", std::nan(""), 1.0).pass);
}

TEST_CASE("contour crossings interpolate along the detuning axis", "[verify]") {
  const std::vector<double> g_tau{1.0, 2.0};
  const std::vector<double> dg{-1.0, 0.0, 1.0};
  RMatrix r(3, 2);
  r << 0.0, 1.0,  //
      1.0, 1.0,   //
      0.5, 1.0;
  const auto pts = checks::contour_crossings(r, g_tau, dg, 0.75);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].g_tau == 1.0);
  CHECK_THAT(pts[0].delta_over_g, WithinAbs(-0.25, 1e-15));
  CHECK_THAT(pts[1].delta_over_g, WithinAbs(0.5, 1e-15));
  CHECK(checks::linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}
