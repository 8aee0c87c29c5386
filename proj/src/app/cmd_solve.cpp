#include <cmath>

#include "csgame/oracles/oracles.hpp"
#include "csgame/pde/field_io.hpp"
#include "support.hpp"

namespace csgame {

using namespace app;

namespace {

void print_assumptions(const ConfigFile& cfg, const AssumptionReport& rep) {
  fmt::print("{}: {} ({} samples)\n", cfg.spec.name.empty() ? "problem" : cfg.spec.name,
             rep.valid() ? "assumptions hold" : "assumptions violated", rep.samples);
  fmt::print("  K0 = {:.6g}  K1 = {:.6g}  K2 = {:.6g}  min f-|grad g| = {:.6g}\n", rep.K0, rep.K1, rep.K2,
             rep.grad_g_le_f_margin);
  for (const auto& [check, count] : rep.violation_counts) fmt::print("  violation {}: {} samples\n", check, count);
}

AssumptionReport run_assumptions(RunDirectory& run, const ConfigFile& cfg, const CommandOptions& opts) {
  const auto t0 = Clock::now();
  AssumptionReport rep = validate_assumptions(cfg.spec, cfg.spec.sample_plan, opts.exec);
  run.stage("assumptions", seconds_since(t0));
  run.write_json("assumptions.json", to_json(rep));
  run.manifest()["seeds"]["sample_plan"] = cfg.spec.sample_plan.seed;
  if (!opts.quiet) print_assumptions(cfg, rep);
  return rep;
}

}  // namespace

int cmd_validate(const CommandOptions& opts) {
  const ConfigFile cfg = load_config(opts.config);
  RunDirectory run(opts.out, "validate", sha256_hex(cfg.canonical_text));
  run.manifest()["config"] = opts.config.string();
  return guarded(run, opts, [&] {
    const AssumptionReport rep = run_assumptions(run, cfg, opts);
    run.manifest()["summary"] = {{"valid", rep.valid()}, {"violation_counts", rep.violation_counts}};
    return rep.valid() ? kExitOk : kExitFailure;
  });
}

int cmd_solve(const CommandOptions& opts) {
  const ConfigFile cfg = load_config(opts.config);
  const SolveSetup setup = solve_setup(cfg, opts);
  RunDirectory run(opts.out, "solve", sha256_hex(cfg.canonical_text));
  run.manifest()["config"] = opts.config.string();
  run.manifest()["settings"] = to_json(setup);

  return guarded(run, opts, [&] {
    const ProblemSpec& spec = cfg.spec;
    const AssumptionReport rep = run_assumptions(run, cfg, opts);
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
    run.manifest()["constants"] = {{"K0", rep.K0}, {"K2", rep.K2}};

    const auto schedule = setup.schedule();
    std::size_t solved = 0;
    auto on_point = [&](const PenaltyPoint& p) {
      ++solved;
      if (!opts.quiet) {
        fmt::print("  point {}/{}: eps={:.6g} delta={:.6g} iters={} residual={:.3g} bounds {} ({:.1f}s)\n", solved,
                   schedule.size(), p.eps, p.delta, p.iters, p.residual, p.bounds_pass() ? "pass" : "FAIL",
                   p.wall_seconds);
      }
    };

    const auto t0 = Clock::now();
    ContinuationResult res;
    try {
      res = continuation(spec, schedule, setup.policy(spec), sopts, on_point);
    } catch (const ContinuationError& e) {
      run.stage("continuation", seconds_since(t0));
      json pts = json::array();
      for (const auto& p : e.points) pts.push_back(to_json(p));
      run.write_json("points.json", {{"points", pts}, {"completed", e.points.size()}, {"error", e.what()}});
      run.manifest()["summary"] = {{"converged", false}, {"completed_points", e.points.size()}};
      throw;
    }
    run.stage("continuation", seconds_since(t0));

    json pts = json::array();
    for (const auto& p : res.points) pts.push_back(to_json(p));
    run.write_json("points.json", {{"points", pts},
                                   {"cauchy_increments", res.cauchy_increments},
                                   {"common_radius", res.common_radius}});

    const PenaltyPoint& last = res.points.back();
    const GridField& limit = res.limit;
    const Grid& grid = limit.grid();
    write_field_binary(run.file("limit_field.bin"), limit);
    run.record("limit_field.bin");
    run.manifest()["final_point"] = {{"eps", last.eps}, {"delta", last.delta}, {"m", last.m}};

    auto t1 = Clock::now();
    const TruncatedData data(spec, last.m, std::min(0.005, grid.hx() / 4.0));
    const VIReport vi = vi_report(limit, data, setup.tol_region);
    run.write_json("vi_report.json", to_json(vi));
    const std::vector<int> levels = slice_levels(grid, setup.slices);
    write_field_csv(run.file("field.csv"), limit, levels, &vi);
    run.record("field.csv");
    if (grid.dim() == 1) {
      write_region_pgm_1d(run.file("regions.pgm"), vi, slice_levels(grid, 101));
      run.record("regions.pgm");
    } else {
      for (int n : levels) {
        const std::string name = fmt::format("region_t{:06d}.pgm", n);
        write_region_pgm_2d(run.file(name), vi, n);
        run.record(name);
      }
    }
    run.stage("artifacts", seconds_since(t1));

    json oracles = json::object();
    for (const auto& name : setup.oracles) {
      t1 = Clock::now();
      if (name == "obstacle") {
        const ObstacleSolution ob = solve_obstacle({grid, &data});
        const double diff = compare_fields(limit, ob.field);
        oracles["obstacle"] = {{"sup_discrepancy", diff},
                               {"tolerance", 1e-2},
                               {"within_tolerance", diff <= 1e-2},
                               {"complementarity", ob.complementarity},
                               {"sweeps", ob.max_sweeps_used}};
      } else if (grid.dim() != 1) {
        oracles["lattice"] = {{"skipped", "the lattice oracle is one-dimensional"}};
      } else {
        try {
          const LatticeSolution lat = solve_lattice_game({grid, &data}, opts.exec);
          const double diff = compare_fields(limit, lat.value_minmax);
          oracles["lattice"] = {{"min_gap", lat.min_gap},
                                {"max_gap", lat.max_gap},
                                {"weak_duality", lat.min_gap >= 0.0},
                                {"sup_discrepancy", diff},
                                {"gap_tolerance", 5e-3},
                                {"discrepancy_tolerance", 5e-2},
                                {"within_tolerance", lat.max_gap <= 5e-3 && diff <= 5e-2}};
        } catch (const DataError& e) {
          oracles["lattice"] = {{"skipped", e.what()}};
        }
      }
      run.stage("oracle_" + name, seconds_since(t1));
    }
    if (!oracles.empty()) run.manifest()["oracles"] = oracles;

    const json failures = bound_failures(res.points);
    run.manifest()["summary"] = {{"converged", true},
                                 {"points", res.points.size()},
                                 {"bounds_pass", failures.empty()},
                                 {"bound_failures", failures},
                                 {"max_obstacle_violation", vi.max_obstacle_violation},
                                 {"max_gradient_violation", vi.max_gradient_violation},
                                 {"sup_minmax", vi.sup_minmax},
                                 {"sup_maxmin", vi.sup_maxmin}};
    if (!opts.quiet) {
      fmt::print("  limit: max(g-u)+ = {:.3g}, max(|grad u|-f)+ = {:.3g}, VI residuals {:.3g} / {:.3g}\n",
                 vi.max_obstacle_violation, vi.max_gradient_violation, vi.sup_minmax, vi.sup_maxmin);
      for (const auto& [name, o] : oracles.items()) fmt::print("  oracle {}: {}\n", name, o.dump());
      for (const auto& f : failures) fmt::print("  bound FAIL: {}\n", f.dump());
    }
    return failures.empty() ? kExitOk : kExitFailure;
  });
}

}  // namespace csgame
