#pragma once

// Scenario execution for the CLI: evaluates one mode, writes `<mode>.csv` and a
// `<mode>.meta.jsonl` sidecar into the output directory.

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qsl/config.hpp"
#include "qsl/errors.hpp"
#include "qsl/jc_dispersive.hpp"
#include "qsl/jc_unitary.hpp"
#include "qsl/numerics.hpp"
#include "qsl/verify.hpp"

namespace qsl {

namespace schema {
inline constexpr std::string_view kHeatmap = "g_tau,delta_over_g,retention";
inline constexpr std::string_view kTolerance = "retention,delta_t_bound";
inline constexpr std::string_view kSpeeds = "t_times_g,v_phys,v_quo";
inline constexpr std::string_view kQslTable = "tau,theta_quo,v_bar_quo,bound,satisfied";
inline constexpr std::string_view kVerify = "check,max_error,tolerance,pass";
}  // namespace schema

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDomain = 3, kExitVerify = 4, kExitIo = 5 };

inline int exit_code_for(ErrorCode code) {
  if (is_config_error(code)) return kExitConfig;
  if (code == ErrorCode::IoError) return kExitIo;
  return kExitDomain;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path csv_path;
  std::filesystem::path meta_path;
  std::size_t rows = 0;
  std::vector<std::string> warnings;
};

namespace detail {

/// Shortest round-trip decimal form.
inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

inline nlohmann::ordered_json resolved_parameters(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["g"] = cfg.g;
  switch (cfg.mode) {
    case Mode::UnitaryHeatmap:
      j["g_tau_min"] = cfg.heatmap.g_tau_min;
      j["g_tau_max"] = cfg.heatmap.g_tau_max;
      j["n_tau"] = cfg.heatmap.n_tau;
      j["delta_over_g_min"] = cfg.heatmap.delta_over_g_min;
      j["delta_over_g_max"] = cfg.heatmap.delta_over_g_max;
      j["n_delta"] = cfg.heatmap.n_delta;
      j["convention"] = cfg.heatmap.convention == jc::RetentionConvention::Speed ? "speed" : "information";
      break;
    case Mode::UnitaryTolerance:
      j["retentions"] = cfg.retentions;
      break;
    case Mode::OpenSpeeds:
    case Mode::OpenQslTable: {
      const auto& p = cfg.open;
      j["omega_c"] = p.omega_c;
      j["omega_a"] = p.omega_a;
      j["eta"] = p.eta;
      j["b_field"] = p.b_field;
      j["kappa"] = p.kappa;
      j["gamma_1"] = p.gamma_1;
      j["gamma_phi"] = p.gamma_phi;
      j["sigma_z_mean"] = p.sigma_z_mean;
      j["dispersive_threshold"] = p.dispersive_threshold;
      j["theta"] = cfg.theta;
      const auto e = jc::effective_params(p);
      j["delta"] = e.delta;
      j["omega_eff"] = e.omega_eff;
      j["kappa_eff"] = e.kappa_eff;
      if (cfg.mode == Mode::OpenSpeeds) {
        j["t_max_g"] = cfg.t_max_g;
        j["n_t"] = cfg.n_t;
      } else {
        j["tau_g"] = cfg.tau_g;
        j["window_rel"] = cfg.window_rel;
        j["window_lo"] = p.b_field - cfg.window_rel * std::abs(p.b_field);
        j["window_hi"] = p.b_field + cfg.window_rel * std::abs(p.b_field);
        j["window_n_grid"] = cfg.window_n_grid;
      }
      break;
    }
    case Mode::Verify:
      j["seed"] = cfg.seed;
      j["tolerance_scale"] = cfg.tolerance_scale;
      break;
  }
  return j;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    ++rows_;
  }

  std::size_t close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "failed writing " + path_.string());
    return rows_;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

}  // namespace detail

/// Evaluates the configured mode and writes its outputs. Domain and I/O failures
/// throw qsl::Error; a failed verification is reported through exit_code.
inline RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + options.out_dir.string());

  const std::string stem(to_string(cfg.mode));
  RunResult result;
  result.csv_path = options.out_dir / (stem + ".csv");
  result.meta_path = options.out_dir / (stem + ".meta.jsonl");
  nlohmann::ordered_json summary;

  switch (cfg.mode) {
    case Mode::UnitaryHeatmap: {
      const auto& h = cfg.heatmap;
      const auto g_tau = checks::linspace(h.g_tau_min, h.g_tau_max, h.n_tau);
      const auto dg = checks::linspace(h.delta_over_g_min, h.delta_over_g_max, h.n_delta);
      const RMatrix r = jc::heatmap_retention(cfg.g, g_tau, dg, h.convention, options.threads);
      detail::CsvWriter csv(result.csv_path, schema::kHeatmap);
      for (std::size_t i = 0; i < dg.size(); ++i) {
        for (std::size_t j = 0; j < g_tau.size(); ++j) {
          csv.row({detail::num(g_tau[j]), detail::num(dg[i]),
                   detail::num(r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
        }
      }
      result.rows = csv.close();
      break;
    }
    case Mode::UnitaryTolerance: {
      detail::CsvWriter csv(result.csv_path, schema::kTolerance);
      for (double r : cfg.retentions) csv.row({detail::num(r), detail::num(jc::tolerance_bound(r))});
      result.rows = csv.close();
      break;
    }
    case Mode::OpenSpeeds: {
      const auto& p = cfg.open;
      result.warnings = jc::hierarchy_warnings(p);
      std::vector<ProjectedSpeedSample> samples(static_cast<std::size_t>(cfg.n_t));
      parallel_for(samples.size(), options.threads, [&](std::size_t k) {
        const double tg = cfg.t_max_g * static_cast<double>(k + 1) / cfg.n_t;
        samples[k] = jc::speeds_open(p, cfg.theta, tg / cfg.g);
      });
      detail::CsvWriter csv(result.csv_path, schema::kSpeeds);
      for (const auto& s : samples) {
        csv.row({detail::num(s.t * cfg.g), detail::num(s.v_phys / cfg.g), detail::num(s.v_quo / cfg.g)});
      }
      result.rows = csv.close();
      break;
    }
    case Mode::OpenQslTable: {
      const auto& p = cfg.open;
      result.warnings = jc::hierarchy_warnings(p);
      const auto window = CalibrationWindow{p.b_field - cfg.window_rel * std::abs(p.b_field),
                                            p.b_field + cfg.window_rel * std::abs(p.b_field), cfg.window_n_grid};
      std::vector<QslCheck> rows(cfg.tau_g.size());
      parallel_for(rows.size(), options.threads,
                   [&](std::size_t k) { rows[k] = jc::qsl_check_open(p, window, cfg.theta, cfg.tau_g[k] / cfg.g); });
      detail::CsvWriter csv(result.csv_path, schema::kQslTable);
      std::size_t violations = 0;
      for (const auto& c : rows) {
        csv.row({detail::num(c.tau * cfg.g), detail::num(c.theta_quo), detail::num(c.v_bar_quo / cfg.g),
                 detail::num(c.bound * cfg.g),
                 c.satisfied ? "true" : "false"});
        if (!c.satisfied) ++violations;
      }
      result.rows = csv.close();
      summary["violations"] = violations;
      break;
    }
    case Mode::Verify: {
      const auto report = verify_all(cfg.seed, {cfg.tolerance_scale});
      detail::CsvWriter csv(result.csv_path, schema::kVerify);
      for (const auto& e : report.entries) {
        csv.row({e.name, detail::num(e.max_error), detail::num(e.tolerance), e.pass ? "true" : "false"});
      }
      result.rows = csv.close();
      summary["overall"] = report.overall;
      if (!report.overall) result.exit_code = kExitVerify;
      break;
    }
  }

  std::ofstream meta(result.meta_path);
  if (!meta) throw Error(ErrorCode::IoError, "cannot open " + result.meta_path.string() + " for writing");
  nlohmann::ordered_json run;
  run["record"] = "run";
  run["mode"] = stem;
  run["csv"] = result.csv_path.filename().string();
  run["rows"] = result.rows;
  run["seed"] = cfg.seed;
  run["parameters"] = detail::resolved_parameters(cfg);
  if (!summary.empty()) run["summary"] = summary;
  meta << run.dump() << '\n';
  for (const auto& w : result.warnings) {
    nlohmann::ordered_json line;
    line["record"] = "warning";
    line["message"] = w;
    meta << line.dump() << '\n';
  }
  meta.close();
  if (!meta) throw Error(ErrorCode::IoError, "failed writing " + result.meta_path.string());
  return result;
}

}  // namespace qsl
