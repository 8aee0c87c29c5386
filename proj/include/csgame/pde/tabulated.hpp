#pragma once

#include "csgame/kernel/truncation.hpp"
#include "csgame/pde/grid.hpp"

namespace csgame {

/// g, h, f sampled at the nodes of a grid and interpolated multilinearly in
/// between, i.e. the data exactly as the finite-difference solver sees them.
/// Points outside the box fall back to the source data. Used to keep the
/// per-step cost of path simulation low.
class TabulatedData final : public GameData {
 public:
  TabulatedData(const Grid& grid, const GameData& source);

  const ProblemSpec& spec() const override { return source_.spec(); }
  double g(double t, std::span<const double> x) const override;
  double h(double t, std::span<const double> x) const override;
  double f(double t, std::span<const double> x) const override;
  bool time_dependent() const override { return source_.time_dependent(); }

  const GameData& source() const noexcept { return source_; }

 private:
  const GameData& source_;
  GridField g_, h_, f_;
};

}  // namespace csgame
