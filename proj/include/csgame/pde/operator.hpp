#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "csgame/model/problem.hpp"
#include "csgame/pde/grid.hpp"

namespace csgame {

/// Finite-difference generator 𝓛_h = ½ tr(a D²) + ⟨b, ∇⟩ on a grid.
///
/// Stencils are 3-point (d = 1) or 9-point (d = 2) in the order
/// (i-1, i, i+1) × (j-1, j, j+1) with axis 0 fastest. Second derivatives and
/// the mixed derivative are centred. First derivatives are centred unless the
/// cell Péclet number |β| hx / a_ii exceeds `peclet_limit`, where the
/// one-sided upwind difference is used.
class DiscreteGenerator {
 public:
  DiscreteGenerator(const Grid& grid, const ProblemSpec& spec, double peclet_limit = 2.0);

  const Grid& grid() const noexcept { return grid_; }
  int stencil_size() const noexcept { return grid_.dim() == 1 ? 3 : 9; }
  int centre() const noexcept { return grid_.dim() == 1 ? 1 : 4; }
  std::ptrdiff_t offset(int k) const noexcept { return offsets_[k]; }
  double max_diffusion() const noexcept { return max_diffusion_; }
  /// ht · max a_ii / hx².
  double cfl() const noexcept;

  /// Stencil of 𝓛_h at `node` with drift b.
  std::span<const double> weights(std::size_t node) const noexcept {
    return {base_.data() + node * stencil_size(), static_cast<std::size_t>(stencil_size())};
  }
  /// Adds the first-order stencil of ⟨y, ∇⟩ (own Péclet switch) to `w`.
  void add_drift(std::size_t node, std::span<const double> y, std::span<double> w) const noexcept;
  /// Adds the centred stencil of ⟨y, ∇⟩ to `w`.
  void add_centred_drift(std::span<const double> y, std::span<double> w) const noexcept;

  /// (𝓛_h u)(node) for the field level `u`.
  double apply(std::span<const double> u, std::size_t node) const noexcept;

  const double* diffusion(std::size_t node) const noexcept { return &a_[node * grid_.dim() * grid_.dim()]; }

 private:
  void first_order(std::size_t node, int axis, double beta, std::span<double> w) const noexcept;

  Grid grid_;
  double peclet_;
  double max_diffusion_ = 0.0;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> a_;     // per node d×d
  std::vector<double> base_;  // per node stencil of 𝓛_h
};

/// Linear system on the interior nodes of one time level. Row coefficients
/// follow the stencil layout of DiscreteGenerator; entries pointing at
/// boundary nodes are moved to the right-hand side.
class LevelSystem {
 public:
  explicit LevelSystem(const DiscreteGenerator& gen);
  ~LevelSystem();
  LevelSystem(const LevelSystem&) = delete;
  LevelSystem& operator=(const LevelSystem&) = delete;

  /// Row storage for interior index `row` (order of Grid::interior()).
  std::span<double> row(std::size_t row) noexcept {
    return {coef_.data() + row * stencil_, static_cast<std::size_t>(stencil_)};
  }
  std::span<double> rhs() noexcept { return rhs_; }

  /// Solves the system; boundary values are read from `u` and interior
  /// values written into it.
  void solve(std::span<double> u);

 private:
  struct Sparse;
  const DiscreteGenerator& gen_;
  int stencil_;
  std::vector<double> coef_;
  std::vector<double> rhs_;
  std::vector<double> work_c_, work_d_;
  std::unique_ptr<Sparse> sparse_;
};

}  // namespace csgame
