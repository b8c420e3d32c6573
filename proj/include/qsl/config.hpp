#pragma once

// Scenario configuration: a flat `key = value` document. `[section]` headers
// may be used for grouping but do not namespace keys; `#` and `;` start
// comments. Lists are comma separated.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsl/errors.hpp"
#include "qsl/jc_dispersive.hpp"
#include "qsl/jc_unitary.hpp"

namespace qsl {

enum class Mode { UnitaryHeatmap, UnitaryTolerance, OpenSpeeds, OpenQslTable, Verify };

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::UnitaryHeatmap: return "unitary-heatmap";
    case Mode::UnitaryTolerance: return "unitary-tolerance";
    case Mode::OpenSpeeds: return "open-speeds";
    case Mode::OpenQslTable: return "open-qsl-table";
    case Mode::Verify: return "verify";
  }
  return "unknown";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::UnitaryHeatmap, Mode::UnitaryTolerance, Mode::OpenSpeeds, Mode::OpenQslTable, Mode::Verify}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

struct HeatmapSpec {
  double g_tau_min = 0.01;
  double g_tau_max = 5.0;
  int n_tau = 200;
  double delta_over_g_min = -3.0;
  double delta_over_g_max = 3.0;
  int n_delta = 200;
  jc::RetentionConvention convention = jc::RetentionConvention::Information;
};

struct ScenarioConfig {
  Mode mode = Mode::Verify;
  double g = 1.0;

  HeatmapSpec heatmap;
  std::vector<double> retentions{0.99, 0.95, 0.90};

  jc::JcDispersiveParams open;
  double theta = std::numbers::pi / 4;
  double t_max_g = 5.0;  // open-speeds: t in (0, t_max_g / g]
  int n_t = 200;
  std::vector<double> tau_g{1.0, 2.0, 3.0, 4.0, 5.0};  // open-qsl-table, units of 1/g
  double window_rel = 0.02;                             // half-width relative to |b_field|
  int window_n_grid = 201;

  std::uint64_t seed = 0;
  double tolerance_scale = 1.0;
};

namespace detail {

enum class KeyKind { Number, Integer, List, Text };

struct KeySpec {
  KeyKind kind;
  bool required_unitary_heatmap = false;
  bool required_open = false;
};

inline const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table{
      {"mode", {KeyKind::Text}},
      {"g", {KeyKind::Number, true, true}},
      {"g_tau_min", {KeyKind::Number}},
      {"g_tau_max", {KeyKind::Number}},
      {"n_tau", {KeyKind::Integer}},
      {"delta_over_g_min", {KeyKind::Number}},
      {"delta_over_g_max", {KeyKind::Number}},
      {"n_delta", {KeyKind::Integer}},
      {"convention", {KeyKind::Text}},
      {"retentions", {KeyKind::List}},
      {"omega_c", {KeyKind::Number}},
      {"omega_a", {KeyKind::Number}},
      {"eta", {KeyKind::Number}},
      {"b_field", {KeyKind::Number}},
      {"kappa", {KeyKind::Number}},
      {"gamma_1", {KeyKind::Number}},
      {"gamma_phi", {KeyKind::Number}},
      {"sigma_z_mean", {KeyKind::Number}},
      {"dispersive_threshold", {KeyKind::Number}},
      {"theta", {KeyKind::Number}},
      {"t_max_g", {KeyKind::Number}},
      {"n_t", {KeyKind::Integer}},
      {"tau_g", {KeyKind::List}},
      {"window_rel", {KeyKind::Number}},
      {"window_n_grid", {KeyKind::Integer}},
      {"seed", {KeyKind::Integer}},
      {"tolerance_scale", {KeyKind::Number}},
  };
  return table;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
};

inline double to_number(const std::string& key, std::string_view text, int line) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(ErrorCode::InvalidValue, key, line, "not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(ErrorCode::InvalidValue, key, line, "value must be finite");
  return v;
}

inline std::int64_t to_integer(const std::string& key, std::string_view text, int line) {
  text = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(ErrorCode::InvalidValue, key, line, "not an integer: '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<double> to_list(const std::string& key, std::string_view text, int line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(to_number(key, item, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(ErrorCode::InvalidValue, key, line, "empty list");
  return out;
}

}  // namespace detail

/// Parses and validates a scenario document. `mode` (e.g. from the command line)
/// takes effect when the document has no `mode` key and must agree with it otherwise.
inline ScenarioConfig parse_config(std::string_view text, std::optional<Mode> mode = std::nullopt) {
  using detail::KeyKind;
  std::map<std::string, detail::RawEntry> raw;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(ErrorCode::ParseError, "", line_no, "malformed section header");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(ErrorCode::ParseError, "", line_no, "expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(ErrorCode::ParseError, "", line_no, "empty key");
    if (!detail::key_table().contains(key)) throw ConfigError(ErrorCode::ParseError, key, line_no, "unknown key");
    if (raw.contains(key)) {
      throw ConfigError(ErrorCode::ParseError, key, line_no,
                        "duplicate key (first set on line " + std::to_string(raw[key].line) + ")");
    }
    if (value.empty()) throw ConfigError(ErrorCode::InvalidValue, key, line_no, "empty value");
    raw[key] = {value, line_no};
  }

  ScenarioConfig cfg;
  if (raw.contains("mode")) {
    const auto& e = raw["mode"];
    const auto m = parse_mode(e.value);
    if (!m) throw ConfigError(ErrorCode::InvalidValue, "mode", e.line, "unknown mode '" + e.value + "'");
    if (mode && *mode != *m) {
      throw ConfigError(ErrorCode::InvalidValue, "mode", e.line,
                        "document mode '" + e.value + "' conflicts with requested mode '" +
                            std::string(to_string(*mode)) + "'");
    }
    cfg.mode = *m;
  } else if (mode) {
    cfg.mode = *mode;
  } else {
    throw ConfigError(ErrorCode::MissingKey, "mode", 0, "no mode given");
  }

  const bool open_mode = cfg.mode == Mode::OpenSpeeds || cfg.mode == Mode::OpenQslTable;
  for (const auto& [key, spec] : detail::key_table()) {
    const bool required = (spec.required_unitary_heatmap && cfg.mode == Mode::UnitaryHeatmap) ||
                          (spec.required_open && open_mode);
    if (required && !raw.contains(key)) throw ConfigError(ErrorCode::MissingKey, key, 0, "required key is missing");
  }

  auto number = [&](const char* key, double& field) {
    if (const auto it = raw.find(key); it != raw.end()) field = detail::to_number(key, it->second.value, it->second.line);
  };
  auto integer = [&](const char* key, auto& field) {
    if (const auto it = raw.find(key); it != raw.end()) {
      field = static_cast<std::remove_reference_t<decltype(field)>>(
          detail::to_integer(key, it->second.value, it->second.line));
    }
  };
  auto list = [&](const char* key, std::vector<double>& field) {
    if (const auto it = raw.find(key); it != raw.end()) field = detail::to_list(key, it->second.value, it->second.line);
  };
  auto line_of = [&](const std::string& key) { return raw.contains(key) ? raw[key].line : 0; };
  auto invalid = [&](const std::string& key, const std::string& why) {
    return ConfigError(ErrorCode::InvalidValue, key, line_of(key), why);
  };

  number("g", cfg.g);
  number("g_tau_min", cfg.heatmap.g_tau_min);
  number("g_tau_max", cfg.heatmap.g_tau_max);
  integer("n_tau", cfg.heatmap.n_tau);
  number("delta_over_g_min", cfg.heatmap.delta_over_g_min);
  number("delta_over_g_max", cfg.heatmap.delta_over_g_max);
  integer("n_delta", cfg.heatmap.n_delta);
  if (const auto it = raw.find("convention"); it != raw.end()) {
    if (it->second.value == "information") {
      cfg.heatmap.convention = jc::RetentionConvention::Information;
    } else if (it->second.value == "speed") {
      cfg.heatmap.convention = jc::RetentionConvention::Speed;
    } else {
      throw invalid("convention", "expected 'information' or 'speed'");
    }
  }
  list("retentions", cfg.retentions);

  cfg.open.g = cfg.g;
  number("omega_c", cfg.open.omega_c);
  number("omega_a", cfg.open.omega_a);
  number("eta", cfg.open.eta);
  number("b_field", cfg.open.b_field);
  number("kappa", cfg.open.kappa);
  number("gamma_1", cfg.open.gamma_1);
  number("gamma_phi", cfg.open.gamma_phi);
  number("sigma_z_mean", cfg.open.sigma_z_mean);
  number("dispersive_threshold", cfg.open.dispersive_threshold);
  number("theta", cfg.theta);
  number("t_max_g", cfg.t_max_g);
  integer("n_t", cfg.n_t);
  list("tau_g", cfg.tau_g);
  number("window_rel", cfg.window_rel);
  integer("window_n_grid", cfg.window_n_grid);
  if (const auto it = raw.find("seed"); it != raw.end()) {
    const auto v = detail::to_integer("seed", it->second.value, it->second.line);
    if (v < 0) throw invalid("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  number("tolerance_scale", cfg.tolerance_scale);

  if (!(cfg.g > 0.0)) throw invalid("g", "must be > 0");
  if (!(cfg.heatmap.g_tau_min >= 0.0 && cfg.heatmap.g_tau_max > cfg.heatmap.g_tau_min)) {
    throw invalid("g_tau_max", "need 0 <= g_tau_min < g_tau_max");
  }
  if (!(cfg.heatmap.delta_over_g_max > cfg.heatmap.delta_over_g_min)) {
    throw invalid("delta_over_g_max", "need delta_over_g_min < delta_over_g_max");
  }
  if (cfg.heatmap.n_tau < 2) throw invalid("n_tau", "must be >= 2");
  if (cfg.heatmap.n_delta < 2) throw invalid("n_delta", "must be >= 2");
  for (double r : cfg.retentions) {
    if (!(r > 0.0 && r <= 1.0)) throw invalid("retentions", "each retention must lie in (0, 1]");
  }
  if (cfg.open.kappa < 0.0) throw invalid("kappa", "must be >= 0");
  if (cfg.open.gamma_1 < 0.0) throw invalid("gamma_1", "must be >= 0");
  if (cfg.open.gamma_phi < 0.0) throw invalid("gamma_phi", "must be >= 0");
  if (cfg.open.sigma_z_mean < -1.0 || cfg.open.sigma_z_mean > 1.0) throw invalid("sigma_z_mean", "must lie in [-1, 1]");
  if (!(cfg.open.dispersive_threshold > 0.0)) throw invalid("dispersive_threshold", "must be > 0");
  if (!(cfg.theta >= 0.0 && cfg.theta <= std::numbers::pi / 2)) throw invalid("theta", "must lie in [0, pi/2]");
  if (!(cfg.t_max_g > 0.0)) throw invalid("t_max_g", "must be > 0");
  if (cfg.n_t < 1) throw invalid("n_t", "must be >= 1");
  for (double t : cfg.tau_g) {
    if (!(t > 0.0)) throw invalid("tau_g", "each tau must be > 0");
  }
  if (!(cfg.window_rel >= 0.0)) throw invalid("window_rel", "must be >= 0");
  if (cfg.window_n_grid < 2) throw invalid("window_n_grid", "must be >= 2");
  if (!(cfg.tolerance_scale > 0.0)) throw invalid("tolerance_scale", "must be > 0");
  return cfg;
}

}  // namespace qsl
