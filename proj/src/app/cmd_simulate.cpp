#include <cmath>
#include <fstream>
#include <sstream>

#include "csgame/pde/field_io.hpp"
#include "csgame/pde/tabulated.hpp"
#include "support.hpp"

namespace csgame {

using namespace app;

namespace {

constexpr double kAllowance = 2e-2;
constexpr double kMaxExitFraction = 0.05;
// The stopping intensity 1/δ is frozen over each step; beyond this value of
// dt/δ the penalised estimator is not resolved and is reported unchecked.
constexpr double kMaxIntensityStep = 0.1;

std::vector<std::vector<double>> parse_starts(const std::string& text, int dim) {
  std::vector<std::vector<double>> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, '|');) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    auto x = parse_double_list(item);
    if (static_cast<int>(x.size()) != dim) {
      throw ConfigError(fmt::format("start point '{}' needs {} coordinates", item, dim));
    }
    out.push_back(std::move(x));
  }
  if (out.empty()) throw ConfigError("no start points");
  return out;
}

std::string default_starts(int dim) {
  return dim == 1 ? "-1 | -0.5 | 0 | 0.5 | 1" : "0,0 | 0.5,0 | -0.5,0.5 | 1,0 | 0,-1";
}

struct FieldMeta {
  double eps = 0.0;
  double delta = 0.0;
  double m = 0.0;
};

FieldMeta field_meta(const CommandOptions& opts, const Grid& grid) {
  FieldMeta meta;
  const auto manifest = opts.field.parent_path() / "manifest.json";
  if (std::ifstream in(manifest); in) {
    try {
      const json j = json::parse(in);
      if (j.contains("final_point")) {
        meta.eps = j["final_point"].value("eps", 0.0);
        meta.delta = j["final_point"].value("delta", 0.0);
        meta.m = j["final_point"].value("m", 0.0);
      }
    } catch (const json::exception& e) {
      throw IoError(fmt::format("cannot parse '{}': {}", manifest.string(), e.what()));
    }
  }
  if (opts.eps) meta.eps = *opts.eps;
  if (opts.delta) meta.delta = *opts.delta;
  if (opts.radius) meta.m = *opts.radius;
  if (meta.m <= 0.0) meta.m = grid.radius();
  if (!(meta.eps > 0.0) || !(meta.delta > 0.0 && meta.delta < 1.0)) {
    throw ConfigError("penalty parameters unknown: pass --eps and --delta or keep the solve manifest next to the field");
  }
  return meta;
}

std::string coords_csv(const std::vector<double>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + num(x[i]);
  return s;
}

}  // namespace

int cmd_simulate(const CommandOptions& opts) {
  const ConfigFile cfg = load_config(opts.config);
  const ProblemSpec& spec = cfg.spec;
  if (opts.field.empty()) throw ConfigError("simulate needs --field");
  const GridField raw = read_field_binary(opts.field);
  if (raw.grid().dim() != spec.dim) throw ConfigError("field dimension differs from the problem");
  const FieldMeta meta = field_meta(opts, raw.grid());

  PathConfig pc;
  pc.n_paths = opts.paths.value_or(config_int(cfg, "simulate", "paths", pc.n_paths));
  pc.n_steps = opts.steps.value_or(config_int(cfg, "simulate", "steps", pc.n_steps));
  pc.seed = opts.seed.value_or(static_cast<std::uint64_t>(config_int(cfg, "simulate", "seed", 1)));
  pc.antithetic = config_flag(cfg, "simulate", "antithetic", true);
  PathConfig probe_cfg = pc;
  probe_cfg.n_paths = config_int(cfg, "simulate", "probe_paths", 20000);
  const double t0 = config_number(cfg, "simulate", "start_t", 0.0);
  const auto starts =
      parse_starts(opts.start.value_or(config_value(cfg, "simulate", "start").value_or(default_starts(spec.dim))),
                   spec.dim);
  const double band = config_number(cfg, "simulate", "stop_band", 0.1 * raw.grid().hx());
  const std::string ctrl_mode = config_value(cfg, "simulate", "controller").value_or("optimal");
  const std::string stop_mode = config_value(cfg, "simulate", "stopper").value_or("tau_star");
  if (ctrl_mode != "optimal" && ctrl_mode != "idle") throw ConfigError("controller must be optimal or idle");
  if (stop_mode != "tau_star" && stop_mode != "never") throw ConfigError("stopper must be tau_star or never");

  RunDirectory run(opts.out, "simulate", sha256_hex(cfg.canonical_text));
  run.manifest()["config"] = opts.config.string();
  run.manifest()["field"] = {{"path", opts.field.string()}, {"sha256", sha256_file_hex(opts.field)}};
  run.manifest()["settings"] = {{"eps", meta.eps},       {"delta", meta.delta},       {"m", meta.m},
                                {"paths", pc.n_paths},   {"steps", pc.n_steps},       {"antithetic", pc.antithetic},
                                {"probe_paths", probe_cfg.n_paths},                   {"start_t", t0},
                                {"stop_band", band},     {"controller", ctrl_mode},   {"stopper", stop_mode},
                                {"allowance", kAllowance}, {"max_exit_fraction", kMaxExitFraction}};
  run.manifest()["seeds"] = {{"paths", pc.seed}};

  return guarded(run, opts, [&] {
    const auto tprep = Clock::now();
    const FeedbackField field(raw, pc.n_steps);
    const Grid& grid = field.field().grid();
    const Penalty pen(meta.eps);
    const SpecData original(spec);
    const TruncatedData truncated(spec, meta.m, std::min(0.005, grid.hx() / 4.0));
    const TabulatedData data(grid, original);
    const TabulatedData data_m(grid, truncated);
    const Controller opt = Controller::optimal(field, data, pen);
    const Controller opt_m = Controller::optimal(field, data_m, pen);
    const Controller game_ctrl = ctrl_mode == "optimal" ? opt : Controller::idle();
    const Stopper game_stop =
        stop_mode == "tau_star" ? Stopper::tau_star(field, data, band) : Stopper::fixed(spec.horizon);
    const Stopper w_star = Stopper::w_star(field, data_m, meta.delta);
    run.stage("prepare", seconds_since(tprep));

    const double dt = (spec.horizon - t0) / pc.n_steps;
    const bool intensity_resolved = dt / meta.delta <= kMaxIntensityStep;
    run.manifest()["settings"]["intensity_step"] = dt / meta.delta;
    if (!intensity_resolved && !opts.quiet) {
      fmt::print("  dt/delta = {:.3g} > {}: penalized estimates are reported but not checked\n", dt / meta.delta,
                 kMaxIntensityStep);
    }
    std::string header;
    for (int i = 1; i <= spec.dim; ++i) header += fmt::format("x{},", i);
    std::string est_csv =
        header + "estimator,mean,std_error,reference,abs_diff,margin,checked,pass,exit_fraction,rejected,n_paths\n";
    std::string saddle_csv = header + "probe,side,mean,std_error,reference,margin,pass\n";

    json results = json::array();
    bool all_pass = true;
    double worst_exit = 0.0;
    for (const auto& x0 : starts) {
      const StartPoint start{t0, x0};
      const double ref = field.value(t0, x0);
      json entry = {{"x0", x0}, {"t0", t0}, {"reference", ref}};

      auto record = [&](const std::string& name, const PayoffEstimate& e, bool checked) {
        const double diff = std::abs(e.mean - ref);
        const double margin = 3.0 * e.std_error + kAllowance;
        const bool pass = !checked || diff <= margin;
        all_pass = all_pass && pass;
        worst_exit = std::max(worst_exit, e.exit_fraction);
        json j = to_json(e);
        j["abs_diff"] = diff;
        j["margin"] = margin;
        j["checked"] = checked;
        j["pass"] = pass;
        entry[name] = j;
        est_csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", coords_csv(x0), name, num(e.mean),
                               num(e.std_error), num(ref), num(diff), num(margin), checked ? 1 : 0, pass ? 1 : 0,
                               num(e.exit_fraction), e.rejected, e.n_paths);
        if (!opts.quiet) {
          fmt::print("  x0={} {:<10} {:.6f} +- {:.2e} (u = {:.6f}){}\n", coords_csv(x0), name, e.mean, e.std_error,
                     ref, checked ? (pass ? " pass" : " FAIL") : "");
        }
      };

      auto ts = Clock::now();
      record("game", simulate_paths(data, start, game_ctrl, game_stop, pc, opts.exec), false);
      record("penalized", simulate_penalized(data_m, meta.m, pen, meta.delta, start, opt_m, w_star, pc, opts.exec),
             intensity_resolved);
      record("recursive", simulate_recursive(data_m, meta.m, pen, meta.delta, field, start, opt_m, pc, opts.exec),
             true);
      run.stage(fmt::format("estimates[{}]", coords_csv(x0)), seconds_since(ts));

      if (probe_cfg.n_paths > 0) {
        ts = Clock::now();
        const auto perturbations = default_perturbations(field, data, pen, band, start, spec.horizon);
        const SaddleReport sr = saddle_probe(data, field, pen, band, start, perturbations, probe_cfg, kAllowance,
                                             opts.exec);
        json probes = json::array();
        for (const auto& p : sr.probes) {
          const char* side = p.side == Perturbation::Side::kStopper ? "stopper" : "controller";
          all_pass = all_pass && p.pass;
          worst_exit = std::max(worst_exit, p.estimate.exit_fraction);
          json pj = to_json(p.estimate);
          pj["name"] = p.name;
          pj["side"] = side;
          pj["margin"] = p.margin;
          pj["pass"] = p.pass;
          probes.push_back(pj);
          saddle_csv += fmt::format("{},{},{},{},{},{},{},{}\n", coords_csv(x0), p.name, side, num(p.estimate.mean),
                                    num(p.estimate.std_error), num(p.reference), num(p.margin), p.pass ? 1 : 0);
        }
        entry["saddle"] = {{"baseline", to_json(sr.baseline)}, {"probes", probes}, {"all_pass", sr.all_pass()}};
        if (!opts.quiet) {
          std::size_t passed = 0;
          for (const auto& p : sr.probes) passed += p.pass ? 1 : 0;
          fmt::print("  x0={} saddle probes: {}/{} pass\n", coords_csv(x0), passed, sr.probes.size());
        }
        run.stage(fmt::format("saddle[{}]", coords_csv(x0)), seconds_since(ts));
      }
      results.push_back(entry);
    }

    run.write_json("estimates.json", {{"results", results}});
    for (const auto& [name, text] : {std::pair{"estimates.csv", &est_csv}, std::pair{"saddle.csv", &saddle_csv}}) {
      std::ofstream out(run.file(name));
      out << *text;
      if (!out) throw IoError(fmt::format("cannot write '{}'", run.file(name).string()));
      run.record(name);
    }

    const bool exits_ok = worst_exit <= kMaxExitFraction;
    run.manifest()["summary"] = {
        {"all_pass", all_pass}, {"max_exit_fraction", worst_exit}, {"valid_run", exits_ok}};
    if (!exits_ok && !opts.quiet) {
      fmt::print("  invalid run: exit fraction {:.3f} exceeds {:.2f}\n", worst_exit, kMaxExitFraction);
    }
    return all_pass && exits_ok ? kExitOk : kExitFailure;
  });
}

}  // namespace csgame
