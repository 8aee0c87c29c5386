#pragma once

#include <functional>
#include <span>

#include "csgame/kernel/cutoff.hpp"
#include "csgame/model/problem.hpp"

namespace csgame {

/// Pointwise payoff data (g, h, f) attached to the dynamics of a problem.
/// The penalised solver, the oracles and the simulator all read the data
/// through this interface, so truncated and untruncated data are
/// interchangeable.
class GameData {
 public:
  virtual ~GameData() = default;

  virtual const ProblemSpec& spec() const = 0;
  virtual double g(double t, std::span<const double> x) const = 0;
  virtual double h(double t, std::span<const double> x) const = 0;
  virtual double f(double t, std::span<const double> x) const = 0;
  /// False when none of g, h, f depends on t (lets solvers tabulate once).
  virtual bool time_dependent() const { return true; }

  int dim() const { return spec().dim; }
};

/// The problem's own g, h, f.
class SpecData final : public GameData {
 public:
  explicit SpecData(const ProblemSpec& spec) : spec_(spec) {}
  const ProblemSpec& spec() const override { return spec_; }
  double g(double t, std::span<const double> x) const override { return spec_.g.eval(t, x); }
  double h(double t, std::span<const double> x) const override { return spec_.h.eval(t, x); }
  double f(double t, std::span<const double> x) const override { return spec_.f.eval(t, x); }
  bool time_dependent() const override {
    return spec_.g.depends_on_time() || spec_.h.depends_on_time() || spec_.f.depends_on_time();
  }

 private:
  const ProblemSpec& spec_;
};

/// Arbitrary callables, used for manufactured solutions and tests.
class FunctionData final : public GameData {
 public:
  using Fn = std::function<double(double, std::span<const double>)>;
  FunctionData(const ProblemSpec& spec, Fn g, Fn h, Fn f)
      : spec_(spec), g_(std::move(g)), h_(std::move(h)), f_(std::move(f)) {}
  const ProblemSpec& spec() const override { return spec_; }
  double g(double t, std::span<const double> x) const override { return g_(t, x); }
  double h(double t, std::span<const double> x) const override { return h_(t, x); }
  double f(double t, std::span<const double> x) const override { return f_(t, x); }

 private:
  const ProblemSpec& spec_;
  Fn g_, h_, f_;
};

/// Data truncated to the ball B_m:
///   g_m = ξ_{m-1} g,  h_m = ξ_{m-1} h,
///   f_m = (f² + ‖g‖² |∇ξ_{m-1}|² + 2 g ξ_{m-1} ⟨∇ξ_{m-1}, ∇g⟩)^{1/2},
/// with ‖g‖ the max of |g| over a grid of [0,T] × B̄_m. The construction keeps
/// |∇g_m| ≤ f_m on the closed cylinder, g_m = g, h_m = h, f_m = f on
/// 𝓞_{m-1}, and g_m = h_m = 0 outside B_m.
class TruncatedData final : public GameData {
 public:
  /// `sup_step` is the spatial spacing of the grid used for ‖g‖.
  TruncatedData(const ProblemSpec& spec, double m, double sup_step = 0.005);

  const ProblemSpec& spec() const override { return spec_; }
  double radius() const noexcept { return m_; }
  double g_sup_norm() const noexcept { return g_norm_; }
  const Cutoff& cutoff() const noexcept { return cutoff_; }

  double g(double t, std::span<const double> x) const override;
  double h(double t, std::span<const double> x) const override;
  double f(double t, std::span<const double> x) const override;
  bool time_dependent() const override {
    return spec_.g.depends_on_time() || spec_.h.depends_on_time() || spec_.f.depends_on_time();
  }
  /// ∇g_m by the product rule (∇g by finite differences).
  void grad_g(double t, std::span<const double> x, std::span<double> out) const;

 private:
  const ProblemSpec& spec_;
  double m_;
  Cutoff cutoff_;
  double g_norm_ = 0.0;
};

/// m ≥ 2 is required so that 𝓞_{m-1} is nonempty.
inline TruncatedData truncate_data(const ProblemSpec& spec, double m, double sup_step = 0.005) {
  return TruncatedData(spec, m, sup_step);
}

}  // namespace csgame
