#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csgame {

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const SolverError*>(&e)) return kExitNoConvergence;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ExpressionError*>(&e) ||
      dynamic_cast<const IoError*>(&e)) {
    return kExitIo;
  }
  return kExitFailure;
}

}  // namespace csgame

namespace csgame::app {

std::optional<std::string> config_value(const ConfigFile& cfg, const std::string& section, const std::string& key) {
  auto s = cfg.sections.find(section);
  if (s == cfg.sections.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

double config_number(const ConfigFile& cfg, const std::string& section, const std::string& key, double fallback) {
  const auto v = config_value(cfg, section, key);
  if (!v) return fallback;
  const auto list = parse_double_list(*v);
  if (list.size() != 1) throw ConfigError(fmt::format("[{}] {} expects one number", section, key));
  return list[0];
}

int config_int(const ConfigFile& cfg, const std::string& section, const std::string& key, int fallback) {
  const double v = config_number(cfg, section, key, fallback);
  if (v != std::floor(v)) throw ConfigError(fmt::format("[{}] {} expects an integer", section, key));
  return static_cast<int>(v);
}

bool config_flag(const ConfigFile& cfg, const std::string& section, const std::string& key, bool fallback) {
  const auto v = config_value(cfg, section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(fmt::format("[{}] {} expects true or false", section, key));
}

SolveSetup solve_setup(const ConfigFile& cfg, const CommandOptions& opts) {
  SolveSetup s;
  const std::string schedule = opts.schedule.value_or(config_value(cfg, "solve", "schedule").value_or("0.5,0.5,6"));
  const auto sch = parse_double_list(schedule);
  if (sch.size() != 3 || sch[2] < 1 || sch[2] != std::floor(sch[2])) {
    throw ConfigError(fmt::format("schedule '{}' must be eps0,delta0,K with integer K >= 1", schedule));
  }
  s.eps0 = sch[0];
  s.delta0 = sch[1];
  s.K = static_cast<int>(sch[2]);
  if (!(s.eps0 > 0.0) || !(s.delta0 > 0.0 && s.delta0 < 1.0)) {
    throw ConfigError("schedule needs eps0 > 0 and delta0 in (0,1)");
  }

  const std::string grid = opts.grid.value_or(config_value(cfg, "solve", "grid").value_or("4,401,5000"));
  const auto gr = parse_double_list(grid);
  if (gr.size() != 3 || gr[1] != std::floor(gr[1]) || gr[2] != std::floor(gr[2])) {
    throw ConfigError(fmt::format("grid '{}' must be m,nx,nt with integer nx, nt", grid));
  }
  s.m = gr[0];
  s.nx = static_cast<int>(gr[1]);
  s.nt = static_cast<int>(gr[2]);
  if (s.m < 2.0 || s.nx < 5 || s.nt < 1) throw ConfigError("grid needs m >= 2, nx >= 5, nt >= 1");
  s.hx = 2.0 * s.m / (s.nx - 1);
  s.ht = cfg.spec.horizon / s.nt;

  s.tol = opts.tol.value_or(config_number(cfg, "solve", "tol", s.tol));
  if (!(s.tol > 0.0)) throw ConfigError("tol must be > 0");
  s.max_iter = config_int(cfg, "solve", "max_iter", s.max_iter);
  const std::string method = opts.method.value_or(config_value(cfg, "solve", "method").value_or("newton"));
  if (method == "newton") {
    s.method = SolveOptions::Method::kNewton;
  } else if (method == "picard") {
    s.method = SolveOptions::Method::kPicard;
  } else {
    throw ConfigError(fmt::format("unknown method '{}' (newton or picard)", method));
  }
  s.tol_region = config_number(cfg, "solve", "tol_region", 10.0 * s.hx);
  s.slices = config_int(cfg, "solve", "dump_slices", s.slices);
  s.refine_mid = config_flag(cfg, "solve", "refine_mid_schedule", false);
  s.bound_radius = config_number(cfg, "solve", "bound_radius", 0.0);
  if (auto v = config_value(cfg, "solve", "oracles")) {
    std::stringstream in(*v);
    for (std::string item; std::getline(in, item, ',');) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (item.empty()) continue;
      if (item != "obstacle" && item != "lattice") {
        throw ConfigError(fmt::format("unknown oracle '{}' (obstacle or lattice)", item));
      }
      s.oracles.push_back(item);
    }
  }
  return s;
}

json to_json(const AssumptionReport& rep) {
  json j;
  j["valid"] = rep.valid();
  j["samples"] = rep.samples;
  j["linear_growth_D1"] = rep.linear_growth_D1;
  json theta = json::array();
  for (const auto& [r, v] : rep.ellipticity_theta) theta.push_back({{"radius", r}, {"theta", v}});
  j["ellipticity_theta"] = theta;
  j["grad_g_le_f_margin"] = rep.grad_g_le_f_margin;
  j["Theta_min"] = rep.Theta_min;
  j["K0"] = rep.K0;
  j["K1"] = rep.K1;
  j["K2"] = rep.K2;
  j["f_time_monotone"] = rep.f_time_monotone;
  j["f_growth_c"] = rep.f_growth_c;
  j["min_a_eigenvalue"] = rep.min_a_eigenvalue;
  j["violation_counts"] = rep.violation_counts;
  json vs = json::array();
  for (const auto& v : rep.violations) vs.push_back({{"check", v.check}, {"t", v.t}, {"x", v.x}, {"value", v.value}});
  j["violations"] = vs;
  return j;
}

json to_json(const std::map<std::string, BoundEntry>& bounds) {
  json j = json::object();
  for (const auto& [name, b] : bounds) {
    j[name] = {{"bound", b.bound}, {"observed", b.observed}, {"enforced", b.enforced}, {"pass", b.pass()}};
  }
  return j;
}

json to_json(const PenaltyPoint& p) {
  const Grid& g = p.field.grid();
  return {{"eps", p.eps},
          {"delta", p.delta},
          {"m", p.m},
          {"grid", {{"nx", g.nx()}, {"nt", g.nt()}, {"hx", g.hx()}, {"ht", g.ht()}}},
          {"iterations", p.iters},
          {"residual", p.residual},
          {"converged", p.converged},
          {"cfl", p.cfl},
          {"wall_seconds", p.wall_seconds},
          {"bounds_pass", p.bounds_pass()},
          {"bound_report", to_json(p.bound_report)}};
}

json to_json(const PayoffEstimate& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"breakdown",
           {{"terminal", e.breakdown.terminal}, {"running", e.breakdown.running}, {"control", e.breakdown.control}}},
          {"n_paths", e.n_paths},
          {"rejected", e.rejected},
          {"exited", e.exited},
          {"exit_fraction", e.exit_fraction},
          {"t0", e.t0},
          {"dt", e.dt},
          {"n_steps", e.n_steps},
          {"antithetic", e.antithetic},
          {"seed", e.seed}};
}

json to_json(const VIReport& r) {
  return {{"tol_region", r.tol_region},
          {"eval_radius", r.eval_radius},
          {"max_obstacle_violation", r.max_obstacle_violation},
          {"max_gradient_violation", r.max_gradient_violation},
          {"sup_minmax", r.sup_minmax},
          {"sup_maxmin", r.sup_maxmin},
          {"sup_order_gap", r.sup_order_gap},
          {"terminal_mismatch", r.terminal_mismatch},
          {"evaluated", r.evaluated_count},
          {"band_nodes", r.band_count},
          {"multi_branch_nodes", r.multi_branch_count}};
}

json to_json(const SolveSetup& s) {
  json sched = json::array();
  for (const auto& p : s.schedule()) sched.push_back({{"eps", p.eps}, {"delta", p.delta}, {"m", p.m}});
  return {{"schedule", sched},
          {"grid", {{"m", s.m}, {"nx", s.nx}, {"nt", s.nt}, {"hx", s.hx}, {"ht", s.ht}}},
          {"tol", s.tol},
          {"max_iter", s.max_iter},
          {"method", s.method == SolveOptions::Method::kNewton ? "newton" : "picard"},
          {"tol_region", s.tol_region},
          {"refine_mid_schedule", s.refine_mid},
          {"bound_radius", s.bound_radius},
          {"oracles", s.oracles}};
}

json bound_failures(const std::vector<PenaltyPoint>& points) {
  json out = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& [name, b] : points[i].bound_report) {
      if (!b.pass()) out.push_back({{"point", i}, {"name", name}, {"bound", b.bound}, {"observed", b.observed}});
    }
  }
  return out;
}

}  // namespace csgame::app
