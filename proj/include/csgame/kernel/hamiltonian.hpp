#pragma once

#include <span>
#include <vector>

#include "csgame/kernel/penalty.hpp"

namespace csgame {

struct HamiltonianValue {
  double H = 0.0;
  std::vector<double> p_star;
};

/// H(f, y) = sup_p { ⟨y,p⟩ − ψ_ε(|p|² − f²) }.
///
/// The maximiser is p* = ρ y/|y| where ρ ≥ f solves |y| = 2ψ'_ε(ρ² − f²)ρ;
/// the root is bracketed and found by bisection to relative tolerance 1e-12.
/// Throws SolverError(kBracketing) if the bracket does not change sign, which
/// can only happen when ψ' is not monotone.
HamiltonianValue hamiltonian(const Penalty& pen, double f_val, std::span<const double> y);

/// Scalar form: only |y| matters. Returns H and writes ρ = |p*|.
double hamiltonian_radial(const Penalty& pen, double f_val, double y_norm, double* rho = nullptr);

}  // namespace csgame
