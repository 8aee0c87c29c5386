#include "csgame/pde/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "csgame/error.hpp"

namespace csgame {

DataTable::DataTable(const Grid& grid, const GameData& data)
    : nodes_(grid.nodes()), time_dependent_(data.time_dependent()) {
  const int levels = time_dependent_ ? grid.nt() + 1 : 1;
  const std::size_t size = static_cast<std::size_t>(levels) * nodes_;
  g_.resize(size);
  h_.resize(size);
  f2_.resize(size);
  std::vector<double> x(grid.dim());
  for (int n = 0; n < levels; ++n) {
    const double t = grid.time(n);
    for (std::size_t k = 0; k < nodes_; ++k) {
      grid.node_x(k, x);
      const std::size_t i = n * nodes_ + k;
      g_[i] = data.g(t, x);
      h_[i] = data.h(t, x);
      const double f = data.f(t, x);
      f2_[i] = f * f;
      if (!std::isfinite(g_[i]) || !std::isfinite(h_[i]) || !std::isfinite(f2_[i])) {
        throw SolverError(SolverError::Kind::kNonFiniteSource,
                          fmt::format("non-finite data at t={} node {}", t, k));
      }
    }
  }
}

namespace {

double grad_norm_sq(const Grid& grid, std::span<const double> u, std::size_t node, double* grad) {
  const double inv = 0.5 / grid.hx();
  double s = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const std::size_t st = grid.stride(a);
    grad[a] = (u[node + st] - u[node - st]) * inv;
    s += grad[a] * grad[a];
  }
  return s;
}

// Shared machinery for one grid: generator, tables, level system.
struct LevelWorkspace {
  LevelWorkspace(const Grid& grid, const GameData& data, double peclet)
      : grid(grid), gen(grid, data.spec(), peclet), table(grid, data), sys(gen), rate(data.spec().rate) {}

  void set_boundary(int n, std::span<double> u) const {
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      if (grid.is_boundary(k)) u[k] = table.g(n, k);
    }
  }

  void set_terminal(GridField& w) const {
    auto u = w.level(grid.nt());
    for (std::size_t k = 0; k < grid.nodes(); ++k) u[k] = table.g(grid.nt(), k);
  }

  const Grid& grid;
  DiscreteGenerator gen;
  DataTable table;
  LevelSystem sys;
  double rate;
};

void gamma_into(LevelWorkspace& ws, const Penalty& pen, double delta, const GridField& frozen, GridField& w) {
  const Grid& grid = ws.grid;
  const double ht = grid.ht();
  const int s = ws.gen.stencil_size();
  const int c = ws.gen.centre();
  const auto interior = grid.interior();
  double grad[2];
  ws.set_terminal(w);
  for (int n = grid.nt() - 1; n >= 0; --n) {
    auto u = w.level(n);
    ws.set_boundary(n, u);
    const auto phi = frozen.level(n);
    const auto next = w.level(n + 1);
    auto rhs = ws.sys.rhs();
    for (std::size_t r = 0; r < interior.size(); ++r) {
      const std::size_t node = interior[r];
      const double z = grad_norm_sq(grid, phi, node, grad) - ws.table.f2(n, node);
      const double src = ws.table.h(n, node) + std::max(ws.table.g(n, node) - phi[node], 0.0) / delta -
                         pen.value(z);
      if (!std::isfinite(src)) {
        throw SolverError(SolverError::Kind::kNonFiniteSource, fmt::format("non-finite source at level {}", n));
      }
      auto row = ws.sys.row(r);
      const auto wgt = ws.gen.weights(node);
      for (int k = 0; k < s; ++k) row[k] = -ht * wgt[k];
      row[c] += 1.0 + ht * ws.rate;
      rhs[r] = next[node] + ht * src;
    }
    ws.sys.solve(u);
  }
}

// Residual of the implicit level equation at every interior node.
double level_residual(const LevelWorkspace& ws, const Penalty& pen, double delta, int n,
                      std::span<const double> u, std::span<const double> next, std::vector<double>* out) {
  const Grid& grid = ws.grid;
  const double ht = grid.ht();
  double grad[2];
  double worst = 0.0;
  const auto interior = grid.interior();
  for (std::size_t r = 0; r < interior.size(); ++r) {
    const std::size_t node = interior[r];
    const double z = grad_norm_sq(grid, u, node, grad) - ws.table.f2(n, node);
    const double g = ws.table.g(n, node);
    const double R = u[node] -
                     ht * (ws.gen.apply(u, node) - ws.rate * u[node] + ws.table.h(n, node) +
                           std::max(g - u[node], 0.0) / delta - pen.value(z)) -
                     next[node];
    if (out) (*out)[r] = R;
    worst = std::max(worst, std::abs(R));
  }
  return worst;
}

// Semismooth Newton on one implicit level; returns iterations used.
int newton_level(LevelWorkspace& ws, const Penalty& pen, double delta, int n, std::span<double> u,
                 std::span<const double> next, const SolveOptions& opts, double& last_update) {
  const Grid& grid = ws.grid;
  const double ht = grid.ht();
  const int s = ws.gen.stencil_size();
  const int c = ws.gen.centre();
  const auto interior = grid.interior();
  std::vector<double> R(interior.size());
  std::vector<double> step(grid.nodes(), 0.0);
  std::vector<double> trial(u.begin(), u.end());
  double grad[2];
  double y[2];

  double res = level_residual(ws, pen, delta, n, u, next, &R);
  for (int it = 1; it <= opts.max_iter; ++it) {
    auto rhs = ws.sys.rhs();
    for (std::size_t r = 0; r < interior.size(); ++r) {
      const std::size_t node = interior[r];
      const double z = grad_norm_sq(grid, u, node, grad) - ws.table.f2(n, node);
      const double dpsi = pen.d1(z);
      for (int a = 0; a < grid.dim(); ++a) y[a] = -2.0 * dpsi * grad[a];
      auto row = ws.sys.row(r);
      const auto wgt = ws.gen.weights(node);
      std::copy(wgt.begin(), wgt.end(), row.begin());
      // exact derivative of the centred gradient in the penalty
      if (dpsi != 0.0) ws.gen.add_centred_drift(std::span<const double>(y, grid.dim()), row);
      for (int k = 0; k < s; ++k) row[k] *= -ht;
      const double active = ws.table.g(n, node) > u[node] ? 1.0 / delta : 0.0;
      row[c] += 1.0 + ht * (ws.rate + active);
      rhs[r] = -R[r];
    }
    ws.sys.solve(step);

    double upd = 0.0;
    for (std::size_t node : interior) upd = std::max(upd, std::abs(step[node]));
    if (!std::isfinite(upd) || upd > 1e6) {
      throw SolverError(SolverError::Kind::kDivergence, fmt::format("Newton diverged at level {}", n));
    }

    // backtracking on the sup-norm residual
    double alpha = 1.0;
    double res_trial = res;
    for (int ls = 0; ls < 12; ++ls) {
      for (std::size_t node : interior) trial[node] = u[node] + alpha * step[node];
      res_trial = level_residual(ws, pen, delta, n, trial, next, nullptr);
      if (res_trial <= (1.0 - 1e-4 * alpha) * res || res <= 1e-14) break;
      alpha *= 0.5;
    }
    for (std::size_t node : interior) u[node] = trial[node];
    res = level_residual(ws, pen, delta, n, u, next, &R);
    last_update = alpha * upd;
    if (upd <= opts.tol) return it;
  }
  throw SolverError(SolverError::Kind::kMaxIterations,
                    fmt::format("Newton did not converge in {} iterations at level {} (eps={}, delta={})",
                                opts.max_iter, n, pen.eps(), delta));
}

}  // namespace

GridField gamma_step(const Grid& grid, const GameData& data, const Penalty& pen, double delta,
                     const GridField& frozen, double peclet_limit) {
  if (!frozen.grid().same_as(grid)) throw ConfigError("gamma_step: frozen field lives on another grid");
  LevelWorkspace ws(grid, data, peclet_limit);
  GridField w(grid);
  gamma_into(ws, pen, delta, frozen, w);
  return w;
}

bool PenaltyPoint::bounds_pass() const {
  return std::all_of(bound_report.begin(), bound_report.end(), [](const auto& kv) { return kv.second.pass(); });
}

void report_bounds(PenaltyPoint& point, const DataTable& table, const DiscreteGenerator& gen, double rate,
                   const Penalty& pen, const BoundConstants& c, double tol, double bound_radius) {
  const GridField& u = point.field;
  const Grid& grid = u.grid();
  const double inner = bound_radius > 0.0 ? bound_radius : std::max(grid.radius() - 2.0, 0.0);
  const double inner2 = inner * inner * (1.0 + 1e-12);
  struct Extremes {
    double min_u = std::numeric_limits<double>::infinity();
    double growth = 0.0;
    double gap = 0.0;
    double dt_max = -std::numeric_limits<double>::infinity();
    double psi_max = 0.0;
  } in, all;
  double grad[2];
  double theta_min = 0.0;
  std::vector<double> g_level(grid.nodes());
  for (int n = 0; n <= grid.nt(); ++n) {
    const auto lv = u.level(n);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const double r2 = grid.node_norm_sq(k);
      for (Extremes* e : {&all, r2 <= inner2 ? &in : nullptr}) {
        if (!e) continue;
        e->min_u = std::min(e->min_u, lv[k]);
        e->growth = std::max(e->growth, lv[k] / (1.0 + r2));
        e->gap = std::max(e->gap, table.g(n, k) - lv[k]);
      }
    }
    if (n == grid.nt()) continue;
    const auto nx = u.level(n + 1);
    for (std::size_t k = 0; k < grid.nodes(); ++k) g_level[k] = table.g(n, k);
    for (std::size_t k : grid.interior()) {
      const double theta = table.h(n, k) + (table.g(n + 1, k) - g_level[k]) / grid.ht() + gen.apply(g_level, k) -
                           rate * g_level[k];
      theta_min = std::min(theta_min, theta);
      const double dt = (nx[k] - lv[k]) / grid.ht();
      const double z = grad_norm_sq(grid, lv, k, grad) - table.f2(n, k);
      const double p = pen.value(z);
      for (Extremes* e : {&all, grid.node_norm_sq(k) <= inner2 ? &in : nullptr}) {
        if (!e) continue;
        e->dt_max = std::max(e->dt_max, dt);
        e->psi_max = std::max(e->psi_max, p);
      }
    }
  }
  const double T = grid.horizon();
  const double K4 = c.K0 * (1.0 + T) + c.K2 + 0.05;
  auto& rep = point.bound_report;
  rep["nonnegative"] = {tol, -all.min_u, true};
  rep["growth_ratio"] = {c.K3 ? *c.K3 + c.K2 * point.delta + 10.0 * tol : all.growth, all.growth, false};
  rep["obstacle_penalty"] = {c.K2 + 10.0 * tol, std::max(in.gap, 0.0) / point.delta, false};
  rep["obstacle_penalty_full_box"] = {c.K2 + 10.0 * tol, std::max(all.gap, 0.0) / point.delta, false};
  rep["obstacle_penalty_truncated"] = {-theta_min + 10.0 * tol, std::max(all.gap, 0.0) / point.delta, true};
  rep["time_derivative"] = {K4, in.dt_max, true};
  rep["time_derivative_full_box"] = {K4, all.dt_max, false};
  rep["gradient_penalty"] = {in.psi_max, in.psi_max, false};
}

PenaltyPoint solve_penalized(const Grid& grid, const GameData& data, const Penalty& pen, double delta,
                             const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("solver tolerance must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (opts.initial && !opts.initial->grid().same_as(grid)) {
    throw ConfigError("warm start lives on another grid");
  }
  const auto start = std::chrono::steady_clock::now();
  LevelWorkspace ws(grid, data, opts.peclet_limit);

  PenaltyPoint point;
  point.eps = pen.eps();
  point.delta = delta;
  point.m = grid.radius();
  point.cfl = ws.gen.cfl();
  point.field = GridField(grid);
  GridField& u = point.field;

  if (opts.method == SolveOptions::Method::kNewton) {
    ws.set_terminal(u);
    for (int n = grid.nt() - 1; n >= 0; --n) {
      auto lv = u.level(n);
      const auto next = u.level(n + 1);
      if (opts.initial) {
        const auto w0 = opts.initial->level(n);
        std::copy(w0.begin(), w0.end(), lv.begin());
      } else {
        std::copy(next.begin(), next.end(), lv.begin());
      }
      ws.set_boundary(n, lv);
      double upd = 0.0;
      point.iters = std::max(point.iters, newton_level(ws, pen, delta, n, lv, next, opts, upd));
      point.residual = std::max(point.residual, upd);
    }
    point.converged = true;
  } else {
    if (opts.initial) {
      u = *opts.initial;
    } else {
      for (int n = 0; n <= grid.nt(); ++n) {
        auto lv = u.level(n);
        for (std::size_t k = 0; k < grid.nodes(); ++k) lv[k] = ws.table.g(n, k);
      }
    }
    GridField w(grid);
    double omega = opts.damping;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
      gamma_into(ws, pen, delta, u, w);
      double upd = 0.0;
      auto uv = u.values();
      const auto wv = w.values();
      for (std::size_t i = 0; i < uv.size(); ++i) upd = std::max(upd, std::abs(wv[i] - uv[i]));
      if (!std::isfinite(upd) || upd > 1e6) {
        throw SolverError(SolverError::Kind::kDivergence, fmt::format("Picard diverged at sweep {}", it));
      }
      if (upd > prev) omega *= 0.5;
      for (std::size_t i = 0; i < uv.size(); ++i) uv[i] = (1.0 - omega) * uv[i] + omega * wv[i];
      prev = upd;
      point.iters = it;
      point.residual = upd;
      if (upd <= opts.tol) {
        point.converged = true;
        break;
      }
    }
    if (!point.converged) {
      throw SolverError(SolverError::Kind::kMaxIterations,
                        fmt::format("Picard did not converge in {} sweeps (last update {})", opts.max_iter,
                                    point.residual));
    }
  }

  report_bounds(point, ws.table, ws.gen, ws.rate, pen, opts.constants, opts.tol, opts.bound_radius);
  point.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return point;
}

std::vector<SchedulePoint> geometric_schedule(double eps0, double delta0, int K, double m) {
  if (K < 1) throw ConfigError("schedule needs K >= 1");
  std::vector<SchedulePoint> out;
  for (int k = 0; k < K; ++k) out.push_back({std::ldexp(eps0, -k), std::ldexp(delta0, -k), m});
  return out;
}

GridPolicy fixed_grid_policy(int dim, double hx, double ht, double horizon, bool refine_mid_schedule) {
  return [=](std::size_t index, std::size_t count, double m) {
    const bool coarse = refine_mid_schedule && count > 1 && index < count / 2;
    const double s = coarse ? 2.0 : 1.0;
    return Grid::from_steps(dim, m, s * hx, s * ht, horizon);
  };
}

GridField restrict_to_box(const GridField& field, double radius) {
  const Grid& g = field.grid();
  if (radius >= g.radius()) return field;
  const int i0 = static_cast<int>(std::ceil((g.radius() - radius) / g.hx() - 1e-9));
  const int nx = g.nx() - 2 * i0;
  if (nx < 3) throw ConfigError("restriction box is smaller than the grid spacing");
  Grid sub(g.dim(), g.radius() - i0 * g.hx(), nx, g.nt(), g.horizon());
  GridField out(sub);
  for (int n = 0; n <= g.nt(); ++n) {
    for (std::size_t k = 0; k < sub.nodes(); ++k) {
      std::size_t src = static_cast<std::size_t>(sub.axis_index(k, 0) + i0);
      if (g.dim() == 2) src += static_cast<std::size_t>(sub.axis_index(k, 1) + i0) * g.nx();
      out.at(n, k) = field.at(n, src);
    }
  }
  return out;
}

namespace {

double sup_difference(const GridField& a, const GridField& b) {
  double d = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) d = std::max(d, std::abs(av[i] - bv[i]));
  return d;
}

}  // namespace

ContinuationResult continuation(const ProblemSpec& spec, const std::vector<SchedulePoint>& schedule,
                                const GridPolicy& policy, SolveOptions opts,
                                const std::function<void(const PenaltyPoint&)>& on_point,
                                Penalty::Bridge bridge) {
  if (schedule.empty()) throw ConfigError("empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i].eps > schedule[i - 1].eps || schedule[i].delta > schedule[i - 1].delta ||
        schedule[i].m < schedule[i - 1].m) {
      throw ConfigError("schedule must have eps, delta nonincreasing and m nondecreasing");
    }
  }

  ContinuationResult result;
  result.common_radius = schedule.front().m;
  std::map<double, std::unique_ptr<TruncatedData>> data_by_m;
  GridField warm;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const SchedulePoint& sp = schedule[i];
    const Grid grid = policy(i, schedule.size(), sp.m);
    auto& data = data_by_m[sp.m];
    if (!data) data = std::make_unique<TruncatedData>(spec, sp.m, std::min(0.005, grid.hx() / 4.0));

    SolveOptions local = opts;
    if (i > 0) {
      warm = interpolate_to(result.points.back().field, grid);
      local.initial = &warm;
    }
    PenaltyPoint point;
    try {
      point = solve_penalized(grid, *data, Penalty(sp.eps, bridge), sp.delta, local);
    } catch (const SolverError& e) {
      throw ContinuationError(e, std::move(result.points));
    }
    if (i == 0) opts.constants.K3 = point.bound_report["growth_ratio"].observed;
    if (on_point) on_point(point);
    if (i > 0) {
      const GridField prev = interpolate_to(result.points.back().field, grid);
      result.cauchy_increments.push_back(sup_difference(restrict_to_box(prev, result.common_radius),
                                                        restrict_to_box(point.field, result.common_radius)));
    }
    result.points.push_back(std::move(point));
  }
  result.limit = restrict_to_box(result.points.back().field, result.common_radius);
  return result;
}

}  // namespace csgame
