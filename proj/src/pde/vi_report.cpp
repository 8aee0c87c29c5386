#include "csgame/pde/vi_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csgame/pde/operator.hpp"
#include "csgame/pde/solver.hpp"

namespace csgame {

VIReport vi_report(const GridField& field, const GameData& data, double tol_region, double eval_radius,
                   double peclet_limit) {
  const Grid& grid = field.grid();
  if (eval_radius <= 0.0) eval_radius = grid.radius() - 1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double r = data.spec().rate;
  const double ht = grid.ht();

  VIReport rep;
  rep.tol_region = tol_region;
  rep.eval_radius = eval_radius;
  rep.residual_minmax = GridField(grid, nan);
  rep.residual_maxmin = GridField(grid, nan);
  const std::size_t total = grid.levels() * grid.nodes();
  rep.evaluated.assign(total, 0);
  rep.in_C.assign(total, 0);
  rep.in_I.assign(total, 0);
  rep.region.assign(total, VIReport::kStop);

  DiscreteGenerator gen(grid, data.spec(), peclet_limit);
  DataTable table(grid, data);
  const double lim = eval_radius * eval_radius;
  double grad[2];

  for (int n = 0; n <= grid.nt(); ++n) {
    const auto u = field.level(n);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const double gap = u[k] - table.g(n, k);
      const std::size_t idx = rep.index(n, k);
      rep.region[idx] = gap <= 0.0 ? VIReport::kStop : gap <= tol_region ? VIReport::kBand : VIReport::kContinuation;
    }
  }

  for (std::size_t k : grid.interior()) {
    if (grid.node_norm_sq(k) >= lim) continue;
    rep.terminal_mismatch =
        std::max(rep.terminal_mismatch, std::abs(field.at(grid.nt(), k) - table.g(grid.nt(), k)));
    for (int n = 0; n < grid.nt(); ++n) {
      const auto u = field.level(n);
      const auto next = field.level(n + 1);
      const std::size_t idx = rep.index(n, k);
      field.nodal_gradient(n, k, grad);
      double gn = 0.0;
      for (int a = 0; a < grid.dim(); ++a) gn += grad[a] * grad[a];
      gn = std::sqrt(gn);
      const double g = table.g(n, k);
      const double f = std::sqrt(table.f2(n, k));
      const double A = (next[k] - u[k]) / ht + gen.apply(u, k) - r * u[k] + table.h(n, k);
      const double obst = g - u[k];
      const double grad_slack = f - gn;
      const double mm = std::min(std::max(A, obst), grad_slack);
      const double xm = std::max(std::min(A, grad_slack), obst);
      rep.residual_minmax.at(n, k) = mm;
      rep.residual_maxmin.at(n, k) = xm;
      rep.evaluated[idx] = 1;
      rep.in_C[idx] = -obst > tol_region;
      rep.in_I[idx] = grad_slack > tol_region;
      if (rep.region[idx] == VIReport::kBand) ++rep.band_count;
      // branches: equation (A = 0), stopping (u = g), control (|∇u| = f); count those not binding
      const int loose = (std::abs(A) > tol_region) + (std::abs(obst) > tol_region) + (std::abs(grad_slack) > tol_region);
      if (loose < 2) ++rep.multi_branch_count;
      ++rep.evaluated_count;
      rep.max_obstacle_violation = std::max(rep.max_obstacle_violation, obst);
      rep.max_gradient_violation = std::max(rep.max_gradient_violation, -grad_slack);
      rep.sup_minmax = std::max(rep.sup_minmax, std::abs(mm));
      rep.sup_maxmin = std::max(rep.sup_maxmin, std::abs(xm));
      rep.sup_order_gap = std::max(rep.sup_order_gap, std::abs(mm - xm));
    }
  }
  return rep;
}

}  // namespace csgame
