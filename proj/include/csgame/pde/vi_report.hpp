#pragma once

#include <cstdint>
#include <vector>

#include "csgame/kernel/truncation.hpp"
#include "csgame/pde/grid.hpp"

namespace csgame {

/// Residuals of the variational inequality in both orders,
///   min{max{A, g − u}, f − |∇u|}   and   max{min{A, f − |∇u|}, g − u},
/// with A = ∂_t u + 𝓛u − r u + h discretised exactly as in the solver.
/// Only interior nodes with |x| < eval_radius and t < T are evaluated;
/// other entries of the residual fields are NaN.
struct VIReport {
  enum Region : std::uint8_t { kStop = 0, kBand = 1, kContinuation = 2 };

  GridField residual_minmax;
  GridField residual_maxmin;
  std::vector<std::uint8_t> evaluated;  // per (level, node)
  std::vector<std::uint8_t> in_C;       // u − g > tol_region
  std::vector<std::uint8_t> in_I;       // |∇u| < f − tol_region
  std::vector<std::uint8_t> region;     // Region code of u − g
  double tol_region = 0.0;
  double eval_radius = 0.0;

  double max_obstacle_violation = 0.0;  // max (g − u)⁺
  double max_gradient_violation = 0.0;  // max (|∇u| − f)⁺
  double sup_minmax = 0.0;
  double sup_maxmin = 0.0;
  double sup_order_gap = 0.0;           // max |minmax − maxmin|
  double terminal_mismatch = 0.0;       // max |u(T) − g(T)| inside eval_radius
  std::size_t evaluated_count = 0;
  std::size_t band_count = 0;
  std::size_t multi_branch_count = 0;   // nodes where two or more branches bind within tol_region

  std::size_t index(int n, std::size_t node) const noexcept {
    return static_cast<std::size_t>(n) * residual_minmax.grid().nodes() + node;
  }
};

/// `eval_radius` ≤ 0 selects m − 1, where truncated and original data agree.
VIReport vi_report(const GridField& field, const GameData& data, double tol_region, double eval_radius = 0.0,
                   double peclet_limit = 2.0);

}  // namespace csgame
