#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "csgame/app/commands.hpp"
#include "csgame/app/run_dir.hpp"
#include "csgame/error.hpp"
#include "csgame/model/assumptions.hpp"
#include "csgame/model/problem.hpp"
#include "csgame/pde/solver.hpp"
#include "csgame/pde/vi_report.hpp"
#include "csgame/sim/simulate.hpp"

namespace csgame::app {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Lookup of `[section] key` in a loaded config.
std::optional<std::string> config_value(const ConfigFile& cfg, const std::string& section, const std::string& key);
double config_number(const ConfigFile& cfg, const std::string& section, const std::string& key, double fallback);
int config_int(const ConfigFile& cfg, const std::string& section, const std::string& key, int fallback);
bool config_flag(const ConfigFile& cfg, const std::string& section, const std::string& key, bool fallback);

/// Resolved [solve] settings (flags override the config file).
struct SolveSetup {
  double eps0 = 0.5;
  double delta0 = 0.5;
  int K = 6;
  double m = 4.0;
  int nx = 401;
  int nt = 5000;
  double hx = 0.02;
  double ht = 2e-4;
  double tol = 1e-8;
  int max_iter = 50;
  SolveOptions::Method method = SolveOptions::Method::kNewton;
  double tol_region = 0.2;
  int slices = 5;
  bool refine_mid = false;
  double bound_radius = 0.0;
  std::vector<std::string> oracles;

  std::vector<SchedulePoint> schedule() const { return geometric_schedule(eps0, delta0, K, m); }
  GridPolicy policy(const ProblemSpec& spec) const {
    return fixed_grid_policy(spec.dim, hx, ht, spec.horizon, refine_mid);
  }
};

SolveSetup solve_setup(const ConfigFile& cfg, const CommandOptions& opts);

json to_json(const AssumptionReport& rep);
json to_json(const std::map<std::string, BoundEntry>& bounds);
json to_json(const PenaltyPoint& point);
json to_json(const PayoffEstimate& est);
json to_json(const VIReport& rep);
json to_json(const SolveSetup& s);

/// Enforced bound entries that fail, across all points.
json bound_failures(const std::vector<PenaltyPoint>& points);

/// Runs `body`, records any error in the manifest and finalizes the run.
template <class Body>
int guarded(RunDirectory& run, const CommandOptions& opts, Body&& body) {
  int code = kExitFailure;
  const auto t0 = Clock::now();
  try {
    code = body();
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    run.manifest()["error"] = e.what();
    fmt::print(stderr, "error: {}\n", e.what());
  }
  run.manifest()["wall_seconds"] = seconds_since(t0);
  run.finalize(code);
  if (!opts.quiet) fmt::print("run directory: {} (exit {})\n", run.path().string(), code);
  return code;
}

/// "%.17g" so that CSV output round-trips and is byte-stable.
inline std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace csgame::app
