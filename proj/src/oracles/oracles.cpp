#include "csgame/oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "csgame/error.hpp"
#include "csgame/pde/operator.hpp"
#include "csgame/pde/solver.hpp"

namespace csgame {

ObstacleSolution solve_obstacle(const ObstacleProblem& prob, double tol, int max_sweeps, double omega) {
  if (!prob.data) throw ConfigError("obstacle problem without data");
  const Grid& grid = prob.grid;
  const DiscreteGenerator gen(grid, prob.data->spec(), prob.peclet_limit);
  const DataTable table(grid, *prob.data);
  const double r = prob.data->spec().rate;
  const double ht = grid.ht();
  const int s = gen.stencil_size();
  const int c = gen.centre();
  const auto interior = grid.interior();

  ObstacleSolution sol;
  sol.field = GridField(grid);
  GridField& u = sol.field;
  for (std::size_t k = 0; k < grid.nodes(); ++k) u.at(grid.nt(), k) = table.g(grid.nt(), k);

  for (int n = grid.nt() - 1; n >= 0; --n) {
    auto lv = u.level(n);
    const auto next = u.level(n + 1);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      lv[k] = grid.is_boundary(k) ? table.g(n, k) : std::max(next[k], table.g(n, k));
    }
    int sweep = 0;
    for (;;) {
      if (++sweep > max_sweeps) {
        throw SolverError(SolverError::Kind::kMaxIterations,
                          fmt::format("projected SOR exceeded {} sweeps at level {}", max_sweeps, n));
      }
      double change = 0.0;
      for (std::size_t node : interior) {
        const auto w = gen.weights(node);
        double off = 0.0;
        for (int k = 0; k < s; ++k) {
          if (k != c) off -= ht * w[k] * lv[node + gen.offset(k)];
        }
        const double diag = 1.0 + ht * r - ht * w[c];
        const double rhs = next[node] + ht * table.h(n, node);
        const double gs = (rhs - off) / diag;
        const double val = std::max(table.g(n, node), lv[node] + omega * (gs - lv[node]));
        change = std::max(change, std::abs(val - lv[node]));
        lv[node] = val;
      }
      if (change <= tol) break;
    }
    sol.max_sweeps_used = std::max(sol.max_sweeps_used, sweep);
    for (std::size_t node : interior) {
      const double Au = lv[node] * (1.0 + ht * r) - ht * gen.apply(lv, node) - next[node] - ht * table.h(n, node);
      const double comp = std::min(Au / ht, lv[node] - table.g(n, node));
      sol.complementarity = std::max(sol.complementarity, std::abs(comp));
    }
  }
  return sol;
}

void trinomial_weights(double a, double b, double dt, double eta, double& p_down, double& p_mid, double& p_up) {
  const double diff = a * dt / (eta * eta);
  const double drift = b * dt / eta;
  p_up = 0.5 * (diff + drift);
  p_down = 0.5 * (diff - drift);
  p_mid = 1.0 - p_up - p_down;
  if (p_up < 0.0 || p_down < 0.0 || p_mid < 0.0) {
    throw DataError(fmt::format("trinomial weights outside [0,1] (a={}, b={}, dt={}, eta={})", a, b, dt, eta));
  }
}

LatticeSolution solve_lattice_game(const LatticeGame& game, Exec exec) {
  if (!game.data) throw ConfigError("lattice game without data");
  const Grid& grid = game.grid;
  if (grid.dim() != 1) throw ConfigError("the lattice game is one-dimensional");
  const ProblemSpec& spec = game.data->spec();
  const DataTable table(grid, *game.data);
  const int N = grid.nx();
  const double eta = grid.hx();
  const double dt = grid.ht();
  const double disc = std::exp(-spec.rate * dt);

  std::vector<double> pd(N), pm(N), pu(N);
  double x[1], a[1], b[1];
  for (int i = 1; i < N - 1; ++i) {
    x[0] = grid.coord(i);
    spec.diffusion_at(x, a);
    spec.drift_at(x, b);
    trinomial_weights(a[0], b[0], dt, eta, pd[i], pm[i], pu[i]);
  }

  // push costs f·η, f at the midpoint of the jump; cost_dn[i] for i → i−1
  const bool tdep = game.data->time_dependent();
  std::vector<double> cost_up(N, 0.0), cost_dn(N, 0.0);
  auto fill_costs = [&](double t) {
    for (int i = 1; i < N - 1; ++i) {
      x[0] = grid.coord(i) + 0.5 * eta;
      cost_up[i] = eta * game.data->f(t, x);
      x[0] = grid.coord(i) - 0.5 * eta;
      cost_dn[i] = eta * game.data->f(t, x);
    }
  };
  fill_costs(0.0);

  LatticeSolution sol;
  sol.value_minmax = GridField(grid);
  sol.value_maxmin = GridField(grid);
  for (int i = 0; i < N; ++i) {
    sol.value_minmax.at(grid.nt(), i) = table.g(grid.nt(), i);
    sol.value_maxmin.at(grid.nt(), i) = table.g(grid.nt(), i);
  }

  const bool jump_at_stop = game.allow_jump_at_stop;
  for (int n = grid.nt() - 1; n >= 0; --n) {
    if (tdep) fill_costs(grid.time(n));
    const auto up_next = sol.value_minmax.level(n + 1);
    const auto lo_next = sol.value_maxmin.level(n + 1);
    auto up = sol.value_minmax.level(n);
    auto lo = sol.value_maxmin.level(n);
    up[0] = lo[0] = table.g(n, 0);
    up[N - 1] = lo[N - 1] = table.g(n, N - 1);

    auto node = [&](int i) {
      const double cost[3] = {cost_dn[i], 0.0, cost_up[i]};
      double best_up = std::numeric_limits<double>::infinity();
      double cont_lo = std::numeric_limits<double>::infinity();
      double stop_lo = std::numeric_limits<double>::infinity();
      for (int c = -1; c <= 1; ++c) {
        const int j = i + c;
        const double k = cost[c + 1];
        double cu, cl;
        if (j == 0 || j == N - 1) {
          cu = cl = k + table.g(n, j);
        } else {
          const double run = table.h(n, j) * dt;
          cu = k + run + disc * (pd[j] * up_next[j - 1] + pm[j] * up_next[j] + pu[j] * up_next[j + 1]);
          cl = k + run + disc * (pd[j] * lo_next[j - 1] + pm[j] * lo_next[j] + pu[j] * lo_next[j + 1]);
        }
        const double stop = jump_at_stop ? k + table.g(n, j) : table.g(n, i);
        best_up = std::min(best_up, std::max(stop, cu));
        cont_lo = std::min(cont_lo, cl);
        stop_lo = std::min(stop_lo, stop);
      }
      up[i] = best_up;
      lo[i] = std::max(stop_lo, cont_lo);
    };

    if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
      for (int i = 1; i < N - 1; ++i) node(i);
    } else {
      for (int i = 1; i < N - 1; ++i) node(i);
    }
  }

  sol.max_gap = -std::numeric_limits<double>::infinity();
  sol.min_gap = std::numeric_limits<double>::infinity();
  const auto uv = sol.value_minmax.values();
  const auto lv = sol.value_maxmin.values();
  for (std::size_t i = 0; i < uv.size(); ++i) {
    sol.max_gap = std::max(sol.max_gap, uv[i] - lv[i]);
    sol.min_gap = std::min(sol.min_gap, uv[i] - lv[i]);
  }
  return sol;
}

double compare_fields(const GridField& a, const GridField& b, FieldNorm norm) {
  const Grid& ga = a.grid();
  const Grid& gb = b.grid();
  if (ga.dim() != gb.dim()) throw ConfigError("compare_fields: dimensions differ");
  if (std::abs(ga.horizon() - gb.horizon()) > 1e-12 * std::max(1.0, ga.horizon())) {
    throw ConfigError("compare_fields: time horizons differ, no common domain");
  }
  const bool a_finer = ga.hx() < gb.hx() || (ga.hx() == gb.hx() && ga.ht() <= gb.ht());
  const GridField& fine = a_finer ? a : b;
  const GridField& coarse = a_finer ? b : a;
  const double radius = std::min(ga.radius(), gb.radius());
  const GridField target = restrict_to_box(fine, radius);
  const Grid& tg = target.grid();
  if (tg.radius() <= 0.0) throw ConfigError("compare_fields: no common nodes");

  std::vector<double> x(tg.dim());
  double sup = 0.0;
  double sq = 0.0;
  for (int n = 0; n <= tg.nt(); ++n) {
    const double t = tg.time(n);
    for (std::size_t k = 0; k < tg.nodes(); ++k) {
      tg.node_x(k, x);
      const double d = target.at(n, k) - coarse.sample(t, x);
      sup = std::max(sup, std::abs(d));
      sq += d * d;
    }
  }
  if (norm == FieldNorm::kSup) return sup;
  return std::sqrt(sq * std::pow(tg.hx(), tg.dim()) * tg.ht());
}

}  // namespace csgame
