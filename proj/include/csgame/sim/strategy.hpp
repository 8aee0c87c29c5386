#pragma once

#include <span>
#include <vector>

#include "csgame/kernel/penalty.hpp"
#include "csgame/kernel/truncation.hpp"
#include "csgame/pde/grid.hpp"

namespace csgame {

/// A solved field together with its nodal centred-difference gradient; both
/// are interpolated (multi)linearly between nodes.
class FeedbackField {
 public:
  explicit FeedbackField(GridField u);
  /// Resamples `u` onto `time_steps` uniform steps first (0 keeps its grid);
  /// matching the simulation step keeps the working set small.
  FeedbackField(const GridField& u, int time_steps);

  const GridField& field() const noexcept { return u_; }
  int dim() const noexcept { return u_.grid().dim(); }
  bool covers(std::span<const double> x) const noexcept { return u_.covers(x); }
  double value(double t, std::span<const double> x) const noexcept { return u_.sample(t, x); }
  /// ∇u(t,x); outside the box the gradient is clamped to 0 and false is returned.
  bool gradient(double t, std::span<const double> x, std::span<double> out) const noexcept;

 private:
  GridField u_;
  std::vector<GridField> grad_;
};

/// Controller feedback (direction n, rate ν̇ ≥ 0, optional impulse).
struct Controller {
  enum class Mode { kIdle, kOptimal, kConstantPush, kImpulse };

  Mode mode = Mode::kIdle;
  const FeedbackField* field = nullptr;
  const GameData* data = nullptr;  // f entering ψ'
  Penalty pen{0.5};
  double scale = 1.0;              // kOptimal: multiplies ν̇
  double angle = 0.0;              // kOptimal: rotates n (d = 1: only 0 or π)
  std::vector<double> push;        // kConstantPush: n·ν̇
  double impulse_time = 0.0;       // kImpulse: one jump at the first step with t ≥ impulse_time
  double impulse_size = 0.0;
  std::vector<double> impulse_dir;

  /// ν̇* = 2ψ'(|∇u|² − f²)|∇u|, n* = −∇u/|∇u| (any unit vector when ∇u = 0).
  static Controller optimal(const FeedbackField& field, const GameData& data, const Penalty& pen);
  static Controller idle() { return {}; }
  static Controller scaled(Controller base, double factor);
  static Controller rotated(Controller base, double angle);
  static Controller constant_push(std::vector<double> velocity);
  static Controller impulse(double time, double size, std::vector<double> direction);

  bool unperturbed_optimal() const noexcept {
    return mode == Mode::kOptimal && scale == 1.0 && angle == 0.0;
  }

  struct Action {
    double n[2] = {0.0, 0.0};
    double rate = 0.0;   // ν̇
    double grad_norm_sq = 0.0;
    double f = 0.0;        // f(t, x) from `data`, when has_f
    bool has_f = false;
    bool exited = false;  // field gradient unavailable at x
  };
  /// Absolutely continuous part of the control at (t, x).
  Action act(double t, std::span<const double> x) const;
};

/// Stopping rule (original game) or stopping intensity (penalised game).
struct Stopper {
  enum class Mode { kTauStar, kFixed, kWStar, kConstantW };

  Mode mode = Mode::kFixed;
  const FeedbackField* field = nullptr;
  const GameData* data = nullptr;  // g compared with u
  double band = 0.0;               // kTauStar: stop once u ≤ g + band
  double tau = 1e300;              // kFixed: stop at the first grid time ≥ tau
  double w = 0.0;                  // kConstantW
  double delta = 0.5;              // kWStar: w* = 1/δ on {u ≤ g}

  static Stopper tau_star(const FeedbackField& field, const GameData& data, double band);
  static Stopper fixed(double tau);
  static Stopper w_star(const FeedbackField& field, const GameData& data, double delta);
  static Stopper constant_w(double w);

  bool is_intensity() const noexcept { return mode == Mode::kWStar || mode == Mode::kConstantW; }
  bool stop(double t, std::span<const double> x) const;
  double intensity(double t, std::span<const double> x) const;
};

}  // namespace csgame
