#pragma once

#include <span>

namespace csgame {

/// Smooth bridge ξ: ℝ → [0,1], equal to 1 on (-∞,0] and 0 on [1,∞), with
/// ξ(z) = e^{1/(z-1)} / (e^{1/(z-1)} + e^{-1/z}) in between.
double bridge(double z);
double bridge_derivative(double z);

/// max over z ∈ (0,1) of ξ'(z)²/ξ(z) on a uniform grid of `points` nodes,
/// inflated by a 1% safety factor.
double certified_cutoff_constant(int points = 200000);

/// ξ_m(x) = ξ(|x| − m): 1 on B̄_m, 0 outside B_{m+1}, |∇ξ_m|² ≤ C0 ξ_m.
class Cutoff {
 public:
  explicit Cutoff(double m);

  double radius() const noexcept { return m_; }
  double C0() const noexcept { return c0_; }

  double value(std::span<const double> x) const;
  /// Writes ∇ξ_m(x) = (x/|x|) ξ'(|x| − m) into `grad`.
  void gradient(std::span<const double> x, std::span<double> grad) const;
  double gradient_norm_sq(std::span<const double> x) const;

 private:
  double m_;
  double c0_;
};

inline Cutoff build_cutoff(double m) { return Cutoff(m); }

}  // namespace csgame
