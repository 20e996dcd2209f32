#include "ringo/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ringo/checks.hpp"
#include "ringo/errors.hpp"
#include "ringo/scenario.hpp"
#include "ringo/sim_harness.hpp"

namespace ringo {

namespace {

namespace fs = std::filesystem;

int threadsFromEnv() {
  const char* env = std::getenv("RINGO_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1)
    throw ConfigError("RINGO_THREADS must be a positive integer, got \"" + std::string(env) +
                      "\"");
  return static_cast<int>(v);
}

std::ofstream openOut(const fs::path& dir, const char* name) {
  std::ofstream os(dir / name);
  if (!os) throw ConfigError("cannot write " + (dir / name).string());
  return os;
}

void printRun(std::ostream& os, const Scenario& sc, PlanMode mode, const RunResult& run) {
  const RunMetrics& m = run.metrics;
  os << "scenario: " << sc.name << "\n"
     << "mode: " << modeName(mode) << "\n"
     << "status: " << (m.success ? "success" : "failed") << "\n";
  if (!m.success) os << "failure: " << m.failure_reason << "\n";
  os << "length_m: " << m.length << "\n"
     << "travel_time_s: " << m.travel_time << "\n"
     << "comp_multi_ms: " << m.comp_multi_ms << "\n";
  if (mode == PlanMode::Proposed) os << "comp_arm_ms: " << m.comp_arm_ms << "\n";
  os << "comp_total_ms: " << m.comp_total_ms << "\n"
     << "replans: " << m.replans << "\n";
}

void writeRunFiles(const fs::path& dir, const Scenario& sc, PlanMode mode, const RunResult& run,
                   bool verbose) {
  fs::create_directories(dir);
  {
    CompareReport single;
    single.rows.push_back({sc.name, mode, run.metrics});
    single.all_success = run.metrics.success;
    auto os = openOut(dir, "metrics.csv");
    writeMetricsCsv(os, single);
  }
  if (run.guide) {
    auto os = openOut(dir, "trajectory.csv");
    writeTrajectoryCsv(os, run, sc.eeRequest().joint_rate_hz);
  }
  if (!run.cost_trace.empty()) {
    auto os = openOut(dir, "cost_trace.csv");
    writeCostTraceCsv(os, run.cost_trace);
  }
  if (!run.executed.empty()) {
    auto os = openOut(dir, "executed.csv");
    writeExecutedCsv(os, run);
  }
  if (!run.arm_times_ms.empty()) {
    auto os = openOut(dir, "arm_times_ms.csv");
    writeSamplesCsv(os, "arm_ms", run.arm_times_ms);
  }
  if (verbose) std::clog << "wrote run files to " << dir.string() << "\n";
}

int runPlan(const std::string& config, const std::string& out_dir, long seed_override,
            const std::string& mode_override, bool verbose) {
  Scenario sc = loadScenario(config);
  if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
  const PlanMode mode = mode_override.empty() ? sc.mode : parseMode(mode_override);
  if (verbose)
    std::clog << "planning " << sc.name << " [" << modeName(mode) << "], map "
              << sc.map.nx << "x" << sc.map.ny << "x" << sc.map.nz << " at "
              << sc.map.resolution << " m, clearance " << modeInflation(sc, mode) << " m\n";

  const RunResult run = runScenario(sc, mode);
  printRun(std::cout, sc, mode, run);
  if (!out_dir.empty()) writeRunFiles(out_dir, sc, mode, run, verbose);
  return run.metrics.success ? 0 : 2;
}

void printTable(std::ostream& os, const CompareReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-18s %-9s %-7s %9s %8s %9s %8s %9s %8s\n", "scenario",
                "mode", "status", "length_m", "time_s", "multi_ms", "arm_ms", "total_ms",
                "replans");
  os << buf;
  for (const CompareRow& row : report.rows) {
    const RunMetrics& m = row.metrics;
    char arm[32];
    if (row.mode == PlanMode::Proposed)
      std::snprintf(arm, sizeof(arm), "%8.2f", m.comp_arm_ms);
    else
      std::snprintf(arm, sizeof(arm), "%8s", "-");
    std::snprintf(buf, sizeof(buf), "%-18s %-9s %-7s %9.3f %8.2f %9.2f %s %9.2f %8d\n",
                  row.scenario.c_str(), modeName(row.mode), m.success ? "ok" : "failed",
                  m.length, m.travel_time, m.comp_multi_ms, arm, m.comp_total_ms, m.replans);
    os << buf;
  }
  for (const CompareRow& row : report.rows)
    if (!row.metrics.success)
      os << "failed: " << row.scenario << " [" << modeName(row.mode)
         << "]: " << row.metrics.failure_reason << "\n";
}

int runCompare(const std::string& config, const std::string& out_dir, long seed_override,
               bool verbose) {
  const std::vector<std::string> paths = loadScenarioList(config);
  std::vector<Scenario> scenarios;
  for (const std::string& p : paths) {
    scenarios.push_back(loadScenario(p));
    if (seed_override >= 0) scenarios.back().seed = static_cast<std::uint64_t>(seed_override);
  }
  const int threads = threadsFromEnv();
  if (verbose)
    std::clog << "comparing " << scenarios.size() << " scenarios under both modes, " << threads
              << " worker(s)\n";

  const CompareReport report = compareScenarios(scenarios, threads);
  printTable(std::cout, report);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      auto os = openOut(out_dir, "metrics.csv");
      writeMetricsCsv(os, report);
    }
    {
      auto os = openOut(out_dir, "arm_times_ms.csv");
      writeSamplesCsv(os, "arm_ms", report.arm_times_ms);
    }
    if (verbose) std::clog << "wrote comparison files to " << out_dir << "\n";
  }
  return report.all_success ? 0 : 3;
}

int runMap(const std::string& config, const std::string& out_dir, long seed_override,
           bool verbose) {
  Scenario sc = loadScenario(config);
  if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
  const OccupancyGrid grid = buildMap(sc.map, sc.seed, sc.start, sc.goal);
  std::cout << "name: " << sc.name << "\n"
            << "size: " << grid.nx() << " x " << grid.ny() << " x " << grid.nz() << " at "
            << grid.resolution() << " m\n"
            << "origin: " << grid.origin().x() << " " << grid.origin().y() << " "
            << grid.origin().z() << "\n"
            << "occupied: " << grid.occupiedCount() << " of " << grid.numVoxels() << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      auto os = openOut(out_dir, "occupied.csv");
      os << "x,y,z\n";
      for (int k = 0; k < grid.nz(); ++k)
        for (int j = 0; j < grid.ny(); ++j)
          for (int i = 0; i < grid.nx(); ++i)
            if (grid.occupied(i, j, k)) {
              const Eigen::Vector3d c = grid.voxelCenter(i, j, k);
              os << c.x() << ',' << c.y() << ',' << c.z() << '\n';
            }
    }
    {
      const EsdfGrid esdf = EsdfGrid::build(grid);
      auto os = openOut(out_dir, "esdf.bin");
      esdf.dump(os);
    }
    if (verbose) std::clog << "wrote map files to " << out_dir << "\n";
  }
  return 0;
}

int runCheck(const CheckOptions& opts) {
  const CheckReport report = runChecks(opts);
  printChecks(std::cout, report);
  return report.ok ? 0 : 4;
}

}  // namespace

int cliMain(int argc, const char* const* argv) {
  CLI::App app{"plans a guiding body trajectory and a workspace-compatible "
               "end-effector trajectory for an aerial manipulator over voxel maps"};
  app.require_subcommand(1);

  std::string config, out_dir, mode;
  long seed = -1;
  bool verbose = false;

  auto addCommon = [&](CLI::App* cmd, bool with_config) {
    if (with_config)
      cmd->add_option("--config", config, "scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "directory for output files");
    cmd->add_option("--seed", seed, "override the scenario seed")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--verbose", verbose, "progress notes on stderr");
  };

  CLI::App* plan = app.add_subcommand("plan", "plan one scenario and report its metrics");
  addCommon(plan, true);
  plan->add_option("--mode", mode, "proposed or baseline (default: the scenario's mode)");

  CLI::App* compare =
      app.add_subcommand("compare", "run a scenario list under both modes and tabulate");
  addCommon(compare, true);

  CLI::App* map_cmd = app.add_subcommand("map", "build a scenario's map and dump its fields");
  addCommon(map_cmd, true);

  CheckOptions check_opts;
  CLI::App* check = app.add_subcommand("check", "self-diagnosis against independent oracles");
  check->add_flag("--perturb-gradient", check_opts.perturb_gradient,
                  "negative control: corrupt one gradient component and expect failure");
  long check_seed = -1;
  check->add_option("--seed", check_seed, "sweep seed")->check(CLI::NonNegativeNumber);
  check->add_option("--gradient-configs", check_opts.gradient_configs,
                    "random configurations per cost term")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (plan->parsed()) return runPlan(config, out_dir, seed, mode, verbose);
    if (compare->parsed()) return runCompare(config, out_dir, seed, verbose);
    if (map_cmd->parsed()) return runMap(config, out_dir, seed, verbose);
    if (check_seed >= 0) check_opts.seed = static_cast<std::uint64_t>(check_seed);
    return runCheck(check_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const GenerationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ringo
