#include "csgame/pde/grid.hpp"

#include <algorithm>
#include <cmath>

#include "csgame/error.hpp"

namespace csgame {

Grid::Grid(int dim, double radius, int nx, int nt, double horizon)
    : dim_(dim), m_(radius), nx_(nx), nt_(nt), T_(horizon) {
  if (dim != 1 && dim != 2) throw ConfigError("PDE grids support d = 1 or 2 only");
  if (nx < 3 || nt < 1) throw ConfigError("grid needs nx >= 3 and nt >= 1");
  if (!(radius > 0.0) || !(horizon > 0.0)) throw ConfigError("grid radius and horizon must be > 0");
  hx_ = 2.0 * radius / (nx - 1);
  ht_ = horizon / nt;
  nodes_ = dim == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * nx;
  boundary_.assign(nodes_, 0);
  const double lim = radius * radius * (1.0 + 1e-12);
  for (std::size_t k = 0; k < nodes_; ++k) {
    bool b = false;
    for (int a = 0; a < dim; ++a) {
      const int i = axis_index(k, a);
      if (i == 0 || i == nx - 1) b = true;
    }
    if (dim == 2 && node_norm_sq(k) > lim) b = true;
    boundary_[k] = b ? 1 : 0;
    if (!b) interior_.push_back(k);
  }
}

Grid Grid::from_steps(int dim, double radius, double hx, double ht, double horizon) {
  const int nx = static_cast<int>(std::lround(2.0 * radius / hx)) + 1;
  const int nt = std::max(1, static_cast<int>(std::lround(horizon / ht)));
  return Grid(dim, radius, nx, nt, horizon);
}

void Grid::node_x(std::size_t node, std::span<double> x) const noexcept {
  for (int a = 0; a < dim_; ++a) x[a] = coord(axis_index(node, a));
}

double Grid::node_norm_sq(std::size_t node) const noexcept {
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double c = coord(axis_index(node, a));
    s += c * c;
  }
  return s;
}

bool Grid::same_as(const Grid& o) const noexcept {
  return dim_ == o.dim_ && nx_ == o.nx_ && nt_ == o.nt_ && m_ == o.m_ && T_ == o.T_;
}

GridField::GridField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.levels() * grid_.nodes(), fill) {}

bool GridField::covers(std::span<const double> x) const noexcept {
  for (int a = 0; a < grid_.dim(); ++a) {
    if (std::abs(x[a]) > grid_.radius()) return false;
  }
  return true;
}

namespace {

// Cell index and weight of the right node along one axis, clamped.
inline void locate(double c, double lo, double h, int n, int& i, double& w) {
  double s = (c - lo) / h;
  s = std::clamp(s, 0.0, static_cast<double>(n - 1));
  i = std::min(static_cast<int>(s), n - 2);
  w = s - i;
}

}  // namespace

double GridField::sample(double t, std::span<const double> x) const noexcept {
  int n0;
  double wt;
  locate(t, 0.0, grid_.ht(), grid_.nt() + 1, n0, wt);
  const double lo = -grid_.radius();
  const int nx = grid_.nx();
  if (grid_.dim() == 1) {
    int i;
    double w;
    locate(x[0], lo, grid_.hx(), nx, i, w);
    auto lv = [&](int n) { return (1.0 - w) * at(n, i) + w * at(n, i + 1); };
    return (1.0 - wt) * lv(n0) + wt * lv(n0 + 1);
  }
  int i, j;
  double wi, wj;
  locate(x[0], lo, grid_.hx(), nx, i, wi);
  locate(x[1], lo, grid_.hx(), nx, j, wj);
  const std::size_t k = static_cast<std::size_t>(j) * nx + i;
  auto lv = [&](int n) {
    return (1.0 - wj) * ((1.0 - wi) * at(n, k) + wi * at(n, k + 1)) +
           wj * ((1.0 - wi) * at(n, k + nx) + wi * at(n, k + nx + 1));
  };
  return (1.0 - wt) * lv(n0) + wt * lv(n0 + 1);
}

void GridField::nodal_gradient(int n, std::size_t node, std::span<double> grad) const noexcept {
  const double h = grid_.hx();
  for (int a = 0; a < grid_.dim(); ++a) {
    const int i = grid_.axis_index(node, a);
    const std::size_t s = grid_.stride(a);
    if (i == 0) {
      grad[a] = (at(n, node + s) - at(n, node)) / h;
    } else if (i == grid_.nx() - 1) {
      grad[a] = (at(n, node) - at(n, node - s)) / h;
    } else {
      grad[a] = (at(n, node + s) - at(n, node - s)) / (2.0 * h);
    }
  }
}

GridField interpolate_to(const GridField& src, const Grid& target) {
  if (src.grid().same_as(target)) return src;
  GridField out(target);
  std::vector<double> x(static_cast<std::size_t>(target.dim()));
  for (int n = 0; n <= target.nt(); ++n) {
    const double t = target.time(n);
    for (std::size_t k = 0; k < target.nodes(); ++k) {
      target.node_x(k, x);
      out.at(n, k) = src.sample(t, x);
    }
  }
  return out;
}

}  // namespace csgame
