#include "csgame/pde/tabulated.hpp"

#include <vector>

namespace csgame {

TabulatedData::TabulatedData(const Grid& grid, const GameData& source) : source_(source) {
  // time-independent data need two identical levels only
  const Grid table = source.time_dependent()
                         ? grid
                         : Grid(grid.dim(), grid.radius(), grid.nx(), 1, grid.horizon());
  g_ = GridField(table);
  h_ = GridField(table);
  f_ = GridField(table);
  std::vector<double> x(table.dim());
  for (int n = 0; n <= table.nt(); ++n) {
    const double t = table.time(n);
    for (std::size_t k = 0; k < table.nodes(); ++k) {
      table.node_x(k, x);
      g_.at(n, k) = source.g(t, x);
      h_.at(n, k) = source.h(t, x);
      f_.at(n, k) = source.f(t, x);
    }
  }
}

double TabulatedData::g(double t, std::span<const double> x) const {
  return g_.covers(x) ? g_.sample(t, x) : source_.g(t, x);
}

double TabulatedData::h(double t, std::span<const double> x) const {
  return h_.covers(x) ? h_.sample(t, x) : source_.h(t, x);
}

double TabulatedData::f(double t, std::span<const double> x) const {
  return f_.covers(x) ? f_.sample(t, x) : source_.f(t, x);
}

}  // namespace csgame
