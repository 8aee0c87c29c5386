#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "csgame/error.hpp"
#include "csgame/oracles/oracles.hpp"
#include "helpers.hpp"

using namespace csgame;

TEST_CASE("obstacle oracle") {
  const Grid g(1, 4.0, 81, 100, 1.0);
  SUBCASE("zero data") {
    const ConfigFile c = testing::zero();
    const SpecData data(c.spec);
    const ObstacleSolution s = solve_obstacle({g, &data});
    for (double v : s.field.values()) CHECK(v == 0.0);
  }
  SUBCASE("constant obstacle without discount") {
    const ConfigFile c = testing::const1();
    const SpecData data(c.spec);
    const ObstacleSolution s = solve_obstacle({g, &data});
    for (double v : s.field.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bump obstacle") {
    const ConfigFile c = testing::bench_ou();
    const SpecData data(c.spec);
    const ObstacleSolution s = solve_obstacle({g, &data});
    CHECK(s.complementarity <= 1e-6);
    double above = 0.0;
    for (int n = 0; n <= g.nt(); ++n) {
      for (std::size_t k = 0; k < g.nodes(); ++k) {
        const double x[1] = {g.coord(static_cast<int>(k))};
        const double gap = s.field.at(n, k) - data.g(g.time(n), x);
        CHECK(gap >= -1e-12);
        above = std::max(above, gap);
      }
    }
    CHECK(above > 1e-3);
  }
}

TEST_CASE("lattice oracle") {
  SUBCASE("single step with unit payoff") {
    const ConfigFile c = testing::const1();
    const SpecData data(c.spec);
    const LatticeSolution s = solve_lattice_game({Grid(1, 4.0, 41, 1, 0.01), &data});
    for (std::size_t k = 0; k < 41; ++k) {
      CHECK(s.value_minmax.at(0, k) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(s.value_maxmin.at(0, k) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("zero data") {
    const ConfigFile c = testing::zero();
    const SpecData data(c.spec);
    const LatticeSolution s = solve_lattice_game({Grid(1, 4.0, 41, 400, 1.0), &data});
    for (double v : s.value_minmax.values()) CHECK(v == 0.0);
    CHECK(s.max_gap == 0.0);
  }
  SUBCASE("weak duality and serial/parallel agreement on the bump") {
    const ConfigFile c = testing::bench_ou();
    const SpecData data(c.spec);
    const LatticeGame game{Grid(1, 4.0, 81, 400, 1.0), &data};
    const LatticeSolution a = solve_lattice_game(game, Exec::kSerial);
    const LatticeSolution b = solve_lattice_game(game, Exec::kParallel);
    CHECK(a.min_gap >= 0.0);
    const auto eq = [](std::span<const double> x, std::span<const double> y) {
      return std::equal(x.begin(), x.end(), y.begin(), y.end());
    };
    CHECK(eq(a.value_minmax.values(), b.value_minmax.values()));
    CHECK(eq(a.value_maxmin.values(), b.value_maxmin.values()));
  }
  SUBCASE("invalid weights") {
    double pd = 0, pm = 0, pu = 0;
    trinomial_weights(1.0, -0.5, 1e-3, 0.1, pd, pm, pu);
    CHECK(pd + pm + pu == doctest::Approx(1.0));
    CHECK(pu == doctest::Approx(0.5 * (0.1 - 0.005)));
    CHECK_THROWS_AS(trinomial_weights(1.0, 0.0, 1.0, 0.1, pd, pm, pu), DataError);
    const ConfigFile c = testing::const1();
    const SpecData data(c.spec);
    CHECK_THROWS_AS(solve_lattice_game({Grid(1, 4.0, 401, 10, 1.0), &data}), DataError);
  }
}

TEST_CASE("field comparison") {
  const Grid g(1, 2.0, 21, 4, 1.0);
  const GridField zero(g), one(g, 1.0);
  CHECK(compare_fields(zero, zero) == 0.0);
  CHECK(compare_fields(one, one) <= 1e-15);
  CHECK(compare_fields(zero, one) == 1.0);
  // discrete space-time L2 norm: sqrt(Σ hx·ht · 1²) over all nodes and levels
  CHECK(compare_fields(zero, one, FieldNorm::kL2) == doctest::Approx(std::sqrt(21 * 5 * g.hx() * g.ht())));
  CHECK(compare_fields(one, GridField(Grid(1, 3.0, 61, 8, 1.0), 1.0)) == doctest::Approx(0.0).epsilon(1e-14));
}
