// holderlab <experiment> --config <path> [--out <dir>] [--seed <u64>]
//
// Exit codes: 0 success, 1 an acceptance check in the config failed,
// 2 bad usage or configuration, 3 failure while computing.

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "holderlab/lab/experiments.hpp"

namespace {

std::string experiment_list() {
  std::string s;
  for (const auto& [name, planner] : holderlab::lab::experiments()) s += "  " + name + "\n";
  return s;
}

// HOLDERLAB_THREADS is accepted for compatibility; the library is single-threaded.
bool threads_env_ok(std::string& why) {
  const char* v = std::getenv("HOLDERLAB_THREADS");
  if (!v) return true;
  const std::string t(v);
  long long n = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || n < 1) {
    why = "HOLDERLAB_THREADS must be a positive integer, got '" + t + "'";
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace holderlab::lab;
  CLI::App app{"holderlab: numerical experiments on Hölder-continuous fluid fields"};
  app.footer("Experiments:\n" + experiment_list());
  std::string experiment, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", experiment, "experiment to run")->required();
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default $HOLDERLAB_OUT_DIR or ./holderlab-out/<experiment>)");
  app.add_option("--seed", seed, "override run.seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  std::string why;
  if (!threads_env_ok(why)) {
    std::cerr << "holderlab: " << why << "\n";
    return kConfigError;
  }
  if (!experiments().count(experiment)) {
    std::cerr << "holderlab: unknown experiment '" << experiment << "'\nExperiments:\n" << experiment_list();
    return kConfigError;
  }
  if (out_dir.empty()) {
    const char* env = std::getenv("HOLDERLAB_OUT_DIR");
    out_dir = env && *env ? std::string(env) : "holderlab-out/" + experiment;
  }

  std::optional<Config> cfg;
  try {
    cfg = Config::from_file(config_path);
  } catch (const holderlab::Error& e) {
    std::cerr << "holderlab: " << e.what() << "\n";
    return kConfigError;
  }
  const auto outcome = run_experiment(experiment, *cfg, seed, out_dir);
  if (outcome.code == kOk) {
    std::cout << experiment << ": ok, report in " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
  } else {
    std::cerr << "holderlab: " << outcome.message << "\n";
    if (outcome.report) std::cerr << "report in " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
  }
  return outcome.code;
}
