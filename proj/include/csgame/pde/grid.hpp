#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csgame {

/// Uniform tensor grid on [0,T] × [-m,m]^d (d = 1 or 2).
///
/// Spatial nodes are flattened with axis 0 fastest. In d = 2 the ball B_m is
/// approximated by masking: nodes with |x| > m, like the edges of the square,
/// carry Dirichlet data.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, double radius, int nx, int nt, double horizon);

  /// Grid with spacing as close as possible to (hx, ht).
  static Grid from_steps(int dim, double radius, double hx, double ht, double horizon);

  int dim() const noexcept { return dim_; }
  double radius() const noexcept { return m_; }
  int nx() const noexcept { return nx_; }
  int nt() const noexcept { return nt_; }  // number of time steps; nt + 1 levels
  double hx() const noexcept { return hx_; }
  double ht() const noexcept { return ht_; }
  double horizon() const noexcept { return T_; }

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t levels() const noexcept { return static_cast<std::size_t>(nt_) + 1; }
  std::size_t stride(int axis) const noexcept { return axis == 0 ? 1 : static_cast<std::size_t>(nx_); }

  double coord(int i) const noexcept { return -m_ + i * hx_; }
  double time(int n) const noexcept { return n == nt_ ? T_ : n * ht_; }
  int axis_index(std::size_t node, int axis) const noexcept {
    return axis == 0 ? static_cast<int>(node % nx_) : static_cast<int>(node / nx_);
  }
  void node_x(std::size_t node, std::span<double> x) const noexcept;
  double node_norm_sq(std::size_t node) const noexcept;

  bool is_boundary(std::size_t node) const noexcept { return boundary_[node] != 0; }
  std::span<const std::size_t> interior() const noexcept { return interior_; }

  bool same_as(const Grid& other) const noexcept;

 private:
  int dim_ = 1;
  double m_ = 1.0;
  int nx_ = 3;
  int nt_ = 1;
  double hx_ = 1.0;
  double ht_ = 1.0;
  double T_ = 1.0;
  std::size_t nodes_ = 0;
  std::vector<unsigned char> boundary_;
  std::vector<std::size_t> interior_;
};

/// Nodal values on every time level of a grid.
class GridField {
 public:
  GridField() = default;
  explicit GridField(Grid grid, double fill = 0.0);

  const Grid& grid() const noexcept { return grid_; }

  double& at(int n, std::size_t node) noexcept { return values_[n * grid_.nodes() + node]; }
  double at(int n, std::size_t node) const noexcept { return values_[n * grid_.nodes() + node]; }
  std::span<double> level(int n) noexcept { return {values_.data() + n * grid_.nodes(), grid_.nodes()}; }
  std::span<const double> level(int n) const noexcept {
    return {values_.data() + n * grid_.nodes(), grid_.nodes()};
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Is x inside the spatial box [-m,m]^d?
  bool covers(std::span<const double> x) const noexcept;

  /// Linear in time, (bi)linear in space; x is clamped to the box.
  double sample(double t, std::span<const double> x) const noexcept;

  /// Centred-difference gradient at an interior node of level n (one-sided
  /// on the box edges).
  void nodal_gradient(int n, std::size_t node, std::span<double> grad) const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Samples `src` at every node of `target` (multilinear interpolation).
GridField interpolate_to(const GridField& src, const Grid& target);

}  // namespace csgame
