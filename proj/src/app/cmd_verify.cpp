#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "csgame/oracles/oracles.hpp"
#include "csgame/verify/kernel_suite.hpp"
#include "support.hpp"

namespace csgame {

using namespace app;

namespace {

// Coarse resolution used by the per-problem solver checks.
constexpr double kCoarseHx = 0.1;
constexpr double kCoarseHt = 2e-3;
constexpr int kCoarsePoints = 4;

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

json check(const std::string& name, bool pass, json detail = json::object()) {
  detail["name"] = name;
  detail["pass"] = pass;
  return detail;
}

json verify_problem(const ConfigFile& cfg, const CommandOptions& opts, RunDirectory& run) {
  const ProblemSpec& spec = cfg.spec;
  const SolveSetup setup = solve_setup(cfg, opts);
  json checks = json::array();
  const std::string tag = spec.name.empty() ? "problem" : spec.name;

  auto t0 = Clock::now();
  const AssumptionReport rep = validate_assumptions(spec, spec.sample_plan, opts.exec);
  checks.push_back(check("assumptions", rep.valid(), {{"violation_counts", rep.violation_counts}}));
  const AssumptionReport rep_serial = validate_assumptions(spec, spec.sample_plan, Exec::kSerial);
  const bool same_report = to_json(rep).dump() == to_json(rep_serial).dump();
  run.stage(tag + ":assumptions", seconds_since(t0));
  if (!rep.valid()) {
    checks.push_back(check("serial_parallel_assumptions", same_report));
    return checks;
  }

  t0 = Clock::now();
  SolveOptions sopts;
  sopts.method = setup.method;
  sopts.tol = setup.tol;
  sopts.max_iter = setup.max_iter;
  sopts.bound_radius = setup.bound_radius;
  sopts.constants.K0 = rep.K0;
  sopts.constants.K2 = rep.K2;
  const auto schedule = geometric_schedule(setup.eps0, setup.delta0, std::min(setup.K, kCoarsePoints), setup.m);
  const ContinuationResult res =
      continuation(spec, schedule, fixed_grid_policy(spec.dim, kCoarseHx, kCoarseHt, spec.horizon, false), sopts);
  const json failures = bound_failures(res.points);
  checks.push_back(check("continuation_bounds", failures.empty(),
                         {{"points", res.points.size()}, {"hx", kCoarseHx}, {"ht", kCoarseHt}, {"failures", failures}}));
  run.stage(tag + ":continuation", seconds_since(t0));

  t0 = Clock::now();
  const Grid& grid = res.limit.grid();
  const TruncatedData data(spec, res.points.back().m, std::min(0.005, grid.hx() / 4.0));
  const ObstacleSolution ob = solve_obstacle({grid, &data});
  double min_gap = 0.0;
  {
    const DataTable table(grid, data);
    for (int n = 0; n <= grid.nt(); ++n) {
      for (std::size_t k = 0; k < grid.nodes(); ++k) min_gap = std::min(min_gap, ob.field.at(n, k) - table.g(n, k));
    }
  }
  checks.push_back(check("obstacle_complementarity", ob.complementarity <= 1e-6,
                         {{"complementarity", ob.complementarity}, {"tolerance", 1e-6}}));
  checks.push_back(check("obstacle_above_payoff", min_gap >= -1e-10, {{"min_u_minus_g", min_gap}}));
  run.stage(tag + ":obstacle", seconds_since(t0));

  if (spec.dim == 1) {
    t0 = Clock::now();
    try {
      const LatticeSolution par = solve_lattice_game({grid, &data}, Exec::kParallel);
      const LatticeSolution ser = solve_lattice_game({grid, &data}, Exec::kSerial);
      checks.push_back(check("lattice_weak_duality", par.min_gap >= 0.0,
                             {{"min_gap", par.min_gap}, {"max_gap", par.max_gap}}));
      checks.push_back(check("serial_parallel_lattice",
                             bit_equal(par.value_minmax.values(), ser.value_minmax.values()) &&
                                 bit_equal(par.value_maxmin.values(), ser.value_maxmin.values())));
    } catch (const DataError& e) {
      checks.push_back(check("lattice_weak_duality", true, {{"skipped", e.what()}}));
    }
    run.stage(tag + ":lattice", seconds_since(t0));
  }

  t0 = Clock::now();
  PathConfig pc;
  pc.n_paths = 512;
  pc.n_steps = 100;
  pc.seed = opts.seed.value_or(7);
  const SpecData original(spec);
  const StartPoint start{0.0, std::vector<double>(spec.dim, 0.25)};
  const Stopper never = Stopper::fixed(spec.horizon);
  const PayoffEstimate a = simulate_paths(original, start, Controller::idle(), never, pc, Exec::kParallel);
  const PayoffEstimate b = simulate_paths(original, start, Controller::idle(), never, pc, Exec::kSerial);
  const bool same_mc = std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0 &&
                       std::memcmp(&a.std_error, &b.std_error, sizeof(double)) == 0;
  checks.push_back(check("serial_parallel_assumptions", same_report));
  checks.push_back(check("serial_parallel_paths", same_mc, {{"mean", a.mean}, {"std_error", a.std_error}}));
  run.stage(tag + ":reproducibility", seconds_since(t0));
  return checks;
}

}  // namespace

int cmd_verify(const CommandOptions& opts) {
  std::vector<std::filesystem::path> paths = opts.configs;
  if (!opts.config.empty()) paths.insert(paths.begin(), opts.config);
  if (paths.empty()) throw ConfigError("verify needs at least one --config");
  std::vector<ConfigFile> configs;
  std::string joined;
  for (const auto& p : paths) {
    configs.push_back(load_config(p));
    joined += configs.back().canonical_text;
  }

  RunDirectory run(opts.out, "verify", sha256_hex(joined));
  json cfg_list = json::array();
  for (const auto& p : paths) cfg_list.push_back(p.string());
  run.manifest()["configs"] = cfg_list;
  KernelSuiteOptions ko;
  ko.cases = static_cast<std::size_t>(opts.cases.value_or(100000));
  ko.seed = opts.seed.value_or(ko.seed);
  ko.bridge = opts.inject_psi_fault ? Penalty::Bridge::kBrokenForTesting : Penalty::Bridge::kQuintic;
  ko.exec = opts.exec;
  for (const auto& c : configs) ko.specs.push_back(&c.spec);
  run.manifest()["settings"] = {{"cases", ko.cases}, {"fault_injected", opts.inject_psi_fault}};
  run.manifest()["seeds"] = {{"kernel_suite", ko.seed}};

  return guarded(run, opts, [&] {
    bool all_pass = true;
    const auto t0 = Clock::now();
    const auto suite = kernel_invariant_suite(ko);
    run.stage("kernel_suite", seconds_since(t0));
    json suite_json = json::array();
    for (const auto& r : suite) {
      all_pass = all_pass && r.pass();
      suite_json.push_back({{"name", r.name},
                            {"cases", r.cases},
                            {"failures", r.failures},
                            {"worst", r.worst},
                            {"first_failure", r.first_failure},
                            {"pass", r.pass()}});
      if (!opts.quiet) {
        fmt::print("  {:<45} {:>7} cases {}\n", r.name, r.cases,
                   r.pass() ? "pass" : fmt::format("FAIL ({} failures)", r.failures));
      }
    }

    json problems = json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
      json checks;
      try {
        checks = verify_problem(configs[i], opts, run);
      } catch (const Error& e) {
        checks = json::array({check("pipeline", false, {{"error", e.what()}})});
      }
      for (const auto& c : checks) {
        all_pass = all_pass && c["pass"].get<bool>();
        if (!opts.quiet) {
          fmt::print("  {:<20} {:<35} {}\n", configs[i].spec.name, c["name"].get<std::string>(),
                     c["pass"].get<bool>() ? "pass" : "FAIL");
        }
      }
      problems.push_back({{"config", paths[i].string()}, {"name", configs[i].spec.name}, {"checks", checks}});
    }

    run.write_json("verify.json", {{"kernel_suite", suite_json}, {"problems", problems}, {"all_pass", all_pass}});
    run.manifest()["summary"] = {{"all_pass", all_pass}};
    return all_pass ? kExitOk : kExitFailure;
  });
}

int cmd_sweep(const CommandOptions& opts) {
  const ConfigFile cfg = load_config(opts.config);
  const SolveSetup setup = solve_setup(cfg, opts);
  const int levels = opts.levels.value_or(config_int(cfg, "sweep", "levels", 3));
  if (levels < 2) throw ConfigError("sweep needs at least 2 levels");
  RunDirectory run(opts.out, "sweep", sha256_hex(cfg.canonical_text));
  run.manifest()["config"] = opts.config.string();
  run.manifest()["settings"] = to_json(setup);
  run.manifest()["settings"]["levels"] = levels;

  return guarded(run, opts, [&] {
    const ProblemSpec& spec = cfg.spec;
    const AssumptionReport rep = validate_assumptions(spec, spec.sample_plan, opts.exec);
    if (!rep.valid()) {
      run.manifest()["summary"] = {{"valid", false}, {"violation_counts", rep.violation_counts}};
      return kExitFailure;
    }
    SolveOptions sopts;
    sopts.method = setup.method;
    sopts.tol = setup.tol;
    sopts.max_iter = setup.max_iter;
    sopts.bound_radius = setup.bound_radius;
    sopts.constants.K0 = rep.K0;
    sopts.constants.K2 = rep.K2;

    std::string csv = "level,hx,ht,nx,nt,u_origin,sup_diff_to_coarser,l2_diff_to_coarser,observed_order,bounds_pass\n";
    json rows = json::array();
    GridField coarser;
    double prev_diff = 0.0;
    bool bounds_pass = true;
    for (int level = levels - 1; level >= 0; --level) {
      const double s = std::ldexp(1.0, level);
      const auto t0 = Clock::now();
      const ContinuationResult res = continuation(
          spec, setup.schedule(), fixed_grid_policy(spec.dim, s * setup.hx, s * setup.ht, spec.horizon, setup.refine_mid),
          sopts);
      run.stage(fmt::format("level_{}", level), seconds_since(t0));
      const bool level_pass = bound_failures(res.points).empty();
      bounds_pass = bounds_pass && level_pass;
      const Grid& g = res.limit.grid();
      const double u0 = res.limit.sample(0.0, std::vector<double>(spec.dim, 0.0));
      double sup = std::nan(""), l2 = std::nan(""), order = std::nan("");
      if (coarser.grid().nodes() > 0) {
        sup = compare_fields(coarser, res.limit, FieldNorm::kSup);
        l2 = compare_fields(coarser, res.limit, FieldNorm::kL2);
        if (prev_diff > 0.0 && sup > 0.0) order = std::log2(prev_diff / sup);
        prev_diff = sup;
      }
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", level, num(g.hx()), num(g.ht()), g.nx(), g.nt(), num(u0),
                         num(sup), num(l2), num(order), level_pass ? 1 : 0);
      rows.push_back({{"level", level}, {"hx", g.hx()}, {"ht", g.ht()}, {"u_origin", u0}, {"sup_diff", sup},
                      {"l2_diff", l2}, {"observed_order", order}, {"bounds_pass", level_pass}});
      if (!opts.quiet) {
        fmt::print("  level {} hx={:.4g} ht={:.4g} u(0,x=0)={:.6f} sup diff to coarser={:.3g} bounds {}\n", level,
                   g.hx(), g.ht(), u0, sup, level_pass ? "pass" : "FAIL");
      }
      coarser = res.limit;
    }
    {
      std::ofstream out(run.file("sweep.csv"));
      out << csv;
      if (!out) throw IoError(fmt::format("cannot write '{}'", run.file("sweep.csv").string()));
      run.record("sweep.csv");
    }
    run.manifest()["summary"] = {{"levels", rows}, {"bounds_pass", bounds_pass}};
    return bounds_pass ? kExitOk : kExitFailure;
  });
}

}  // namespace csgame
