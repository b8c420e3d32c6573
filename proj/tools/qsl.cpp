// qsl <mode> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qsl/config.hpp"
#include "qsl/scenario.hpp"

namespace {

unsigned threads_from_env() {
  const char* env = std::getenv("QSL_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<unsigned>(v) : 0;
  } catch (const std::exception&) {
    std::cerr << "qsl: ignoring malformed QSL_THREADS='" << env << "'\n";
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuisance-profiled quantum speed limits for Jaynes-Cummings sensors"};
  std::string mode_name;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  app.add_option("mode", mode_name, "unitary-heatmap | unitary-tolerance | open-speeds | open-qsl-table | verify")
      ->required();
  app.add_option("--config", config_path, "scenario file")->required();
  app.add_option("--out", out_dir, "output directory (default: current directory)");
  app.add_option("--seed", seed, "seed for randomized checks (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: QSL_THREADS, then hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qsl::kExitConfig;
  }

  const auto mode = qsl::parse_mode(mode_name);
  if (!mode) {
    std::cerr << "qsl: unknown mode '" << mode_name << "'\n";
    return qsl::kExitConfig;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw qsl::Error(qsl::ErrorCode::IoError, "cannot read config " + config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    auto cfg = qsl::parse_config(buffer.str(), *mode);
    if (seed) cfg.seed = *seed;
    if (threads == 0) threads = threads_from_env();

    const auto result = qsl::run_scenario(cfg, {out_dir, qsl::resolve_threads(threads)});
    for (const auto& w : result.warnings) std::cerr << "qsl: warning: " << w << '\n';
    std::cout << result.csv_path.string() << " (" << result.rows << " rows)\n";
    if (result.exit_code == qsl::kExitVerify) std::cerr << "qsl: verification failed, see " << result.csv_path << '\n';
    return result.exit_code;
  } catch (const qsl::Error& e) {
    std::cerr << "qsl: " << e.what() << '\n';
    return qsl::exit_code_for(e.code());
  }
}
