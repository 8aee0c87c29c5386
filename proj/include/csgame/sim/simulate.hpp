#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csgame/kernel/penalty.hpp"
#include "csgame/kernel/truncation.hpp"
#include "csgame/parallel.hpp"
#include "csgame/sim/strategy.hpp"

namespace csgame {

struct PathConfig {
  int n_paths = 10000;
  int n_steps = 1000;
  std::uint64_t seed = 1;
  /// Pairs path 2i with 2i+1 on negated draws; n_paths must then be even.
  bool antithetic = true;
  int jump_quadrature_points = 16;
};

struct StartPoint {
  double t0 = 0.0;
  std::vector<double> x0;
};

struct PayoffBreakdown {
  double terminal = 0.0;  // discounted g at the stopping/exit time (plus ∫R w g in the penalised game)
  double running = 0.0;   // discounted ∫ h
  double control = 0.0;   // discounted control cost (∫ f dν, or ∫ H in the penalised game)
};

struct PayoffEstimate {
  double mean = 0.0;  // terminal + running + control
  /// Sample std / √n over independent units (paths, or antithetic pairs).
  double std_error = 0.0;
  std::size_t n_paths = 0;  // accepted paths
  std::size_t rejected = 0;
  std::size_t exited = 0;  // paths that queried the field outside its box
  double exit_fraction = 0.0;
  PayoffBreakdown breakdown;
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  bool antithetic = false;
  std::uint64_t seed = 0;
};

/// Original game: singular control (absolutely continuous part plus explicit
/// impulses) against a stopping rule, on the whole space.
PayoffEstimate simulate_paths(const GameData& data, const StartPoint& start, const Controller& ctrl,
                              const Stopper& stop, const PathConfig& cfg, Exec exec = Exec::kParallel);

/// Penalised game on B_m: stopping intensity w, control cost H(f_m, n ν̇),
/// discount R ← R·exp(−(r + w)dt), stopped at the exit of B_m or at T.
/// `data_m` holds the truncated data on B_radius (possibly tabulated).
PayoffEstimate simulate_penalized(const GameData& data_m, double radius, const Penalty& pen, double delta,
                                  const StartPoint& start, const Controller& ctrl, const Stopper& intensity,
                                  const PathConfig& cfg, Exec exec = Exec::kParallel);
inline PayoffEstimate simulate_penalized(const TruncatedData& data, const Penalty& pen, double delta,
                                         const StartPoint& start, const Controller& ctrl,
                                         const Stopper& intensity, const PathConfig& cfg,
                                         Exec exec = Exec::kParallel) {
  return simulate_penalized(data, data.radius(), pen, delta, start, ctrl, intensity, cfg, exec);
}

/// Recursive representation: discount exp(−(r + 1/δ)s), running term
/// h_m + (1/δ)(g_m ∨ u) + H(f_m, n ν̇).
PayoffEstimate simulate_recursive(const GameData& data_m, double radius, const Penalty& pen, double delta,
                                  const FeedbackField& field, const StartPoint& start, const Controller& ctrl,
                                  const PathConfig& cfg, Exec exec = Exec::kParallel);
inline PayoffEstimate simulate_recursive(const TruncatedData& data, const Penalty& pen, double delta,
                                         const FeedbackField& field, const StartPoint& start,
                                         const Controller& ctrl, const PathConfig& cfg,
                                         Exec exec = Exec::kParallel) {
  return simulate_recursive(data, data.radius(), pen, delta, field, start, ctrl, cfg, exec);
}

/// One deviation from the candidate saddle point.
struct Perturbation {
  enum class Side { kStopper, kController };
  std::string name;
  Side side = Side::kStopper;
  Stopper stopper;        // used when side == kStopper
  Controller controller;  // used when side == kController
};

struct ProbeResult {
  std::string name;
  Perturbation::Side side = Perturbation::Side::kStopper;
  PayoffEstimate estimate;
  double reference = 0.0;  // u(start)
  double margin = 0.0;     // 3·std_error + allowance
  bool pass = false;
};

struct SaddleReport {
  double reference = 0.0;
  PayoffEstimate baseline;  // (n*, ν̇*) against τ*
  std::vector<ProbeResult> probes;
  bool all_pass() const;
};

/// Stopper deviations: immediate, never (T), T/2, T/4, shifted bands.
/// Controller deviations: idle, ν̇ scaled by 1/2 and 2, n reversed, constant
/// pushes ±push.
std::vector<Perturbation> default_perturbations(const FeedbackField& field, const GameData& data,
                                                const Penalty& pen, double band, const StartPoint& start,
                                                double horizon, double push = 0.5);

/// Stopper deviations against (n*, ν̇*) must not beat u(start) + margin;
/// controller deviations against τ* must not undercut u(start) − margin.
SaddleReport saddle_probe(const GameData& data, const FeedbackField& field, const Penalty& pen, double band,
                          const StartPoint& start, const std::vector<Perturbation>& perturbations,
                          const PathConfig& cfg, double allowance, Exec exec = Exec::kParallel);

}  // namespace csgame
