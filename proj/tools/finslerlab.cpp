#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "finslerlab/scenario.hpp"

#ifndef FINSLERLAB_DEFAULT_SCENARIO_DIR
#define FINSLERLAB_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace finslerlab;

namespace {

enum Exit { ok = 0, failed = 1, config_error = 2, runtime_error = 3 };

fs::path scenario_dir() {
  if (const char* env = std::getenv("FINSLERLAB_SCENARIO_DIR"); env && *env) return env;
  return FINSLERLAB_DEFAULT_SCENARIO_DIR;
}

/// A path, or a bundled scenario name looked up in the scenario directory.
fs::path resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const auto& candidate : {scenario_dir() / arg, scenario_dir() / (arg + ".yaml")})
    if (fs::exists(candidate)) return candidate;
  throw ConfigError("no scenario file \"" + arg + "\" (searched " + scenario_dir().string() + ")");
}

void apply_tolerance(Tolerances& tol, const std::string& spec) {
  const auto eq = spec.find('=');
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("--tol: bad value \"" + s + "\"");
    }
  };
  if (eq == std::string::npos) {
    tol.pure = tol.connection = number(spec);
    return;
  }
  const auto key = spec.substr(0, eq);
  const double v = number(spec.substr(eq + 1));
  if (key == "pure") tol.pure = v;
  else if (key == "connection") tol.connection = v;
  else if (key == "finite_difference") tol.finite_difference = v;
  else if (key == "zero") tol.zero = v;
  else throw ConfigError("--tol: unknown class \"" + key + "\" (pure, connection, finite_difference, zero)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of Kropina-changed Finsler spaces and their hypersurfaces"};
  std::string scenario;
  std::vector<std::string> tols;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> only;
  std::string format = "human";
  std::string report_path;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool list = false;
  app.add_option("scenario", scenario, "Scenario file, or name of a scenario in $FINSLERLAB_SCENARIO_DIR");
  app.add_option("--tol", tols, "Tolerance override: VALUE (pure and connection) or CLASS=VALUE")
      ->allow_extra_args(false);
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--only", only, "Restrict to equation IDs or tags (comma separated)")->delimiter(',');
  app.add_option("--format", format, "Output format on stdout")->check(CLI::IsMember({"human", "machine"}));
  app.add_option("--report", report_path, "Also write the machine report to this file");
  app.add_option("--jobs", jobs, "Samples evaluated concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--list", list, "Print the identity registry and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::cout << list_registry();
    return ok;
  }
  if (scenario.empty()) {
    std::cerr << "error: a scenario is required (see --help; bundled scenarios live in " << scenario_dir().string()
              << ")\n";
    return config_error;
  }
  Scenario sc;
  try {
    sc = load_scenario(resolve(scenario));
    for (const auto& t : tols) apply_tolerance(sc.tol, t);
    if (seed) sc.seed = *seed;
    if (!only.empty()) {
      std::vector<std::string> names;
      for (const auto& o : only)
        for (const auto& s : split_list(o)) names.push_back(s);
      const auto restricted = resolve_selection(names);
      std::vector<std::string> kept;
      for (const auto& id : sc.selection)
        if (std::find(restricted.begin(), restricted.end(), id) != restricted.end()) kept.push_back(id);
      sc.selection = kept;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  }
  RunReport rr;
  try {
    rr = run_scenario(sc, jobs);
  } catch (const Error& e) {
    std::cerr << "runtime error in scenario " << sc.name << ": " << e.what() << "\n";
    return runtime_error;
  }
  const auto machine = machine_report(rr);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot write " << report_path << "\n";
      return runtime_error;
    }
    out << machine;
  }
  std::cout << (format == "machine" ? machine : human_report(rr));
  return rr.passed() ? ok : failed;
}
