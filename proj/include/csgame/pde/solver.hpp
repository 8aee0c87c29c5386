#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csgame/error.hpp"
#include "csgame/kernel/penalty.hpp"
#include "csgame/kernel/truncation.hpp"
#include "csgame/pde/grid.hpp"
#include "csgame/pde/operator.hpp"

namespace csgame {

/// g, h and f² tabulated on every node and time level of a grid.
class DataTable {
 public:
  DataTable(const Grid& grid, const GameData& data);

  double g(int n, std::size_t node) const noexcept { return g_[index(n, node)]; }
  double h(int n, std::size_t node) const noexcept { return h_[index(n, node)]; }
  double f2(int n, std::size_t node) const noexcept { return f2_[index(n, node)]; }

 private:
  std::size_t index(int n, std::size_t node) const noexcept {
    return (time_dependent_ ? static_cast<std::size_t>(n) * nodes_ : 0) + node;
  }
  std::size_t nodes_;
  bool time_dependent_;
  std::vector<double> g_, h_, f2_;
};

/// Frozen-source linear step w = Γ[φ]: backward Euler for
///   ∂_t w + 𝓛w − r w = −h − (1/δ)(g − φ)⁺ + ψ_ε(|∇φ|² − f²)
/// with w = g on the lateral boundary and at t = T. ∇φ uses centred
/// differences.
GridField gamma_step(const Grid& grid, const GameData& data, const Penalty& pen, double delta,
                     const GridField& frozen, double peclet_limit = 2.0);

struct BoundEntry {
  double bound = 0.0;
  double observed = 0.0;
  bool enforced = true;  // false: recorded only
  bool pass() const { return !enforced || observed <= bound; }
};

/// Constants entering the a-priori bounds.
struct BoundConstants {
  double K0 = 0.0;
  double K2 = 0.0;
  std::optional<double> K3;  // calibrated growth ratio; set after the first point
};

struct SolveOptions {
  enum class Method { kNewton, kPicard };
  Method method = Method::kNewton;
  double tol = 1e-8;
  int max_iter = 50;
  double peclet_limit = 2.0;
  double damping = 1.0;           // initial ω for Picard
  const GridField* initial = nullptr;  // warm start (same grid)
  double bound_radius = 0.0;           // see report_bounds
  BoundConstants constants;
};

struct PenaltyPoint {
  double eps = 0.0;
  double delta = 0.0;
  double m = 0.0;
  GridField field;
  int iters = 0;            // Newton: most iterations on any level; Picard: sweeps
  double residual = 0.0;    // last sup-norm update
  bool converged = false;
  double cfl = 0.0;
  double wall_seconds = 0.0;
  std::map<std::string, BoundEntry> bound_report;
  bool bounds_pass() const;
};

/// Solves the penalised problem on `grid`. kNewton solves each implicit
/// time level by semismooth Newton; kPicard iterates Γ globally with
/// damping halved whenever the update grows.
PenaltyPoint solve_penalized(const Grid& grid, const GameData& data, const Penalty& pen, double delta,
                             const SolveOptions& opts = {});

/// Fills `point.bound_report` from its field.
///
/// The a-priori bounds with the constants of the untruncated data are
/// checked on the nodes with |x| ≤ bound_radius (≤ 0 selects m − 2) and
/// recorded only: near the cutoff annulus they do not apply. The enforced
/// obstacle entry uses the same bound for the problem actually solved,
/// i.e. with K2 replaced by the largest negative part of the discrete
/// Θ_m = h_m + ∂_t g_m + 𝓛_h g_m − r g_m over the box.
void report_bounds(PenaltyPoint& point, const DataTable& table, const DiscreteGenerator& gen, double rate,
                   const Penalty& pen, const BoundConstants& c, double tol, double bound_radius = 0.0);

struct SchedulePoint {
  double eps = 0.5;
  double delta = 0.5;
  double m = 4.0;
};

/// (eps0·2^{1-k}, delta0·2^{1-k}, m) for k = 1..K.
std::vector<SchedulePoint> geometric_schedule(double eps0, double delta0, int K, double m);

/// Grid for schedule point `index` of `count` with radius m.
using GridPolicy = std::function<Grid(std::size_t index, std::size_t count, double m)>;

/// Uses (nx, nt) scaled to the radius; with `refine_mid_schedule` the first
/// half of the schedule runs at half resolution in space and time.
GridPolicy fixed_grid_policy(int dim, double hx, double ht, double horizon, bool refine_mid_schedule);

struct ContinuationResult {
  std::vector<PenaltyPoint> points;
  GridField limit;                       // last field restricted to the common box
  std::vector<double> cauchy_increments;  // sup-norm on the common box, one per point after the first
  double common_radius = 0.0;
};

struct ContinuationError : SolverError {
  ContinuationError(const SolverError& cause, std::vector<PenaltyPoint> partial)
      : SolverError(cause.kind(), cause.what()), points(std::move(partial)) {}
  std::vector<PenaltyPoint> points;
};

/// Runs the schedule, warm-starting each point from the previous field.
/// `on_point` is called after every solved point (for persistence). A
/// failing point raises ContinuationError carrying the solved points.
ContinuationResult continuation(const ProblemSpec& spec, const std::vector<SchedulePoint>& schedule,
                                const GridPolicy& policy, SolveOptions opts = {},
                                const std::function<void(const PenaltyPoint&)>& on_point = {},
                                Penalty::Bridge bridge = Penalty::Bridge::kQuintic);

/// Restriction of a field to the nodes inside [-radius, radius]^d.
GridField restrict_to_box(const GridField& field, double radius);

}  // namespace csgame
