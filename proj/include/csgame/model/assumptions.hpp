#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "csgame/model/problem.hpp"
#include "csgame/parallel.hpp"

namespace csgame {

struct Violation {
  std::string check;
  double t = 0.0;
  std::vector<double> x;
  double value = 0.0;
};

/// Constants estimated by sampling, plus every failed check.
///
/// Only four checks gate validity: local ellipticity (θ_B > 0), the
/// compatibility |∇g| ≤ f, a finite lower bound on Θ = h + ∂_t g + 𝓛g − rg,
/// and t ↦ f(t,x) non-increasing. Nonnegativity of f, g, h and finiteness of
/// the derivatives are also reported as violations. D1, K0, K1 are diagnostics.
struct AssumptionReport {
  double linear_growth_D1 = 0.0;
  std::map<double, double> ellipticity_theta;  // radius -> min eigenvalue of a on the ball
  double grad_g_le_f_margin = 0.0;             // min of f - |∇g|
  double Theta_min = 0.0;
  double K0 = 0.0;  // max forward time-increment rate of g and h, clamped at 0
  double K1 = 0.0;  // max (g + h) / (1 + |x|^2)
  double K2 = 0.0;  // max(0, -Theta_min)
  bool f_time_monotone = true;
  /// Growth constant c in f ≤ c(1+|x|^p) for p = 2, over the sampled box only.
  double f_growth_c = 0.0;
  double min_a_eigenvalue = 0.0;
  std::size_t samples = 0;
  std::map<std::string, std::size_t> violation_counts;
  std::vector<Violation> violations;  // first kMaxStored per check

  static constexpr std::size_t kMaxStored = 20;

  bool valid() const { return violation_counts.empty(); }
};

/// Samples [0,T] × B̄_R for every radius of the plan (tensor grid plus uniform
/// random points) and estimates the constants. Failures are report entries,
/// never exceptions.
AssumptionReport validate_assumptions(const ProblemSpec& spec, const SamplePlan& plan,
                                      Exec exec = Exec::kParallel, double tol = 1e-8);

}  // namespace csgame
