#pragma once

namespace csgame {

/// C² convex penalty ψ_ε: zero on y ≤ 0, (y − ε)/ε on y ≥ 2ε, and the
/// polynomial 2s³ − s⁴ (s = y/2ε) on the bridge (0, 2ε).
class Penalty {
 public:
  /// kBrokenForTesting swaps in 4s³ − 3s⁴, which is neither C¹ at 2ε nor
  /// convex; it exists only so the verification suite can prove it notices.
  enum class Bridge { kQuintic, kBrokenForTesting };

  explicit Penalty(double eps, Bridge bridge = Bridge::kQuintic);

  double eps() const noexcept { return eps_; }
  Bridge bridge() const noexcept { return bridge_; }

  double value(double y) const;
  double d1(double y) const;
  double d2(double y) const;

  /// order 0, 1 or 2.
  double operator()(double y, int order = 0) const;

 private:
  double eps_;
  Bridge bridge_;
};

inline double psi(const Penalty& pen, double y, int order) { return pen(y, order); }

}  // namespace csgame
