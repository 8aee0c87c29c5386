#include "csgame/kernel/hamiltonian.hpp"

#include <cmath>

#include <fmt/format.h>

#include "csgame/error.hpp"

namespace csgame {

double hamiltonian_radial(const Penalty& pen, double f_val, double y_norm, double* rho_out) {
  if (y_norm <= 0.0) {
    if (rho_out) *rho_out = 0.0;
    return 0.0;
  }
  const double eps = pen.eps();
  const double f2 = f_val * f_val;
  auto residual = [&](double rho) { return 2.0 * pen.d1(rho * rho - f2) * rho - y_norm; };

  double lo = f_val;
  // The first bound can fail to bracket when f is small; beyond sqrt(f²+2ε)
  // ψ' = 1/ε, so ρ = max(sqrt(f²+2ε), ε|y|/2) always does.
  double hi = std::max(f_val + eps * (0.5 * y_norm + 1.0), std::sqrt(f2 + 2.0 * eps) + 0.5 * eps * y_norm);
  if (residual(hi) < 0.0 || residual(lo) > 0.0) {
    throw SolverError(SolverError::Kind::kBracketing,
                      fmt::format("hamiltonian: no sign change on [{}, {}] for |y|={}", lo, hi, y_norm));
  }

  double rho;
  const double rho_linear = 0.5 * eps * y_norm;
  if (rho_linear * rho_linear - f2 >= 2.0 * eps) {
    // linear branch of ψ: the first-order condition is solved in closed form
    rho = rho_linear;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (residual(mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    rho = 0.5 * (lo + hi);
  }
  if (rho_out) *rho_out = rho;
  return y_norm * rho - pen.value(rho * rho - f2);
}

HamiltonianValue hamiltonian(const Penalty& pen, double f_val, std::span<const double> y) {
  double n2 = 0.0;
  for (double v : y) n2 += v * v;
  const double yn = std::sqrt(n2);
  HamiltonianValue out;
  out.p_star.assign(y.size(), 0.0);
  if (yn == 0.0) return out;
  double rho = 0.0;
  out.H = hamiltonian_radial(pen, f_val, yn, &rho);
  for (std::size_t i = 0; i < y.size(); ++i) out.p_star[i] = rho * y[i] / yn;
  return out;
}

}  // namespace csgame
