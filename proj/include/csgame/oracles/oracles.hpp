#pragma once

#include "csgame/kernel/truncation.hpp"
#include "csgame/parallel.hpp"
#include "csgame/pde/grid.hpp"

namespace csgame {

/// Pure optimal stopping on the solver grid: the gradient constraint is
/// dropped and the obstacle is enforced exactly.
struct ObstacleProblem {
  Grid grid;
  const GameData* data = nullptr;  // obstacle g, source h; dynamics from data->spec()
  double peclet_limit = 2.0;
};

struct ObstacleSolution {
  GridField field;
  int max_sweeps_used = 0;
  double complementarity = 0.0;  // max |min(−A u, u − g)| over interior nodes
};

/// Backward Euler in time; on each level projected SOR for
///   min(u − ht(𝓛u − r u + h) − u^{n+1}, u − g) = 0.
ObstacleSolution solve_obstacle(const ObstacleProblem& prob, double tol = 1e-10, int max_sweeps = 10000,
                                double omega = 1.3);

/// Trinomial controller/stopper game in d = 1 on the nodes of `grid`.
struct LatticeGame {
  Grid grid;                       // η = hx, dt = ht
  const GameData* data = nullptr;  // g, h, f and the dynamics
  /// Lets the controller push at the moment the stopper stops (stop payoff
  /// cost + g at the pushed node). Off by default.
  bool allow_jump_at_stop = false;
};

struct LatticeSolution {
  GridField value_minmax;  // controller commits first
  GridField value_maxmin;  // stopper commits first
  double max_gap = 0.0;    // max (minmax − maxmin)
  double min_gap = 0.0;    // min (minmax − maxmin); ≥ 0 is weak duality
};

/// Trinomial weights p_± = (σ²dt/η² ± b dt/η)/2, p_0 = 1 − p_+ − p_−.
/// Throws DataError if any weight leaves [0, 1].
void trinomial_weights(double a, double b, double dt, double eta, double& p_down, double& p_mid, double& p_up);

LatticeSolution solve_lattice_game(const LatticeGame& game, Exec exec = Exec::kParallel);

enum class FieldNorm { kSup, kL2 };

/// Discrepancy over the common box; the coarser field is interpolated to the
/// finer grid. Throws ConfigError when the fields share no domain.
double compare_fields(const GridField& a, const GridField& b, FieldNorm norm = FieldNorm::kSup);

}  // namespace csgame
