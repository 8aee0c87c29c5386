#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "csgame/kernel/penalty.hpp"
#include "csgame/model/problem.hpp"
#include "csgame/parallel.hpp"

namespace csgame {

/// Outcome of one randomized invariant check. `worst` is the largest
/// violation margin seen (≤ 0 when every case passed).
struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string first_failure;

  bool pass() const noexcept { return failures == 0 && cases > 0; }
};

struct KernelSuiteOptions {
  std::size_t cases = 100000;
  std::uint64_t seed = 20240611;
  Penalty::Bridge bridge = Penalty::Bridge::kQuintic;
  /// Problems whose truncated data are checked for |∇g_m| ≤ f_m.
  std::vector<const ProblemSpec*> specs;
  std::vector<double> radii{2.0, 3.0, 4.0};
  Exec exec = Exec::kParallel;
};

/// Penalty anchors, smoothness, monotonicity and convexity; Hamiltonian lower
/// bound, zero at y = 0, concavity residual, obstacle compatibility and
/// H nondecreasing in f; the cutoff gradient bound; compatibility of the
/// truncated data. Each check runs `cases` randomized cases.
std::vector<CheckResult> kernel_invariant_suite(const KernelSuiteOptions& opts);

}  // namespace csgame
