#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "csgame/error.hpp"
#include "csgame/pde/field_io.hpp"
#include "csgame/pde/grid.hpp"
#include "csgame/pde/operator.hpp"
#include "csgame/pde/solver.hpp"
#include "csgame/pde/tabulated.hpp"
#include "csgame/pde/vi_report.hpp"
#include "helpers.hpp"

using namespace csgame;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csgame_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double sup_abs(const GridField& a, const GridField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s = std::max(s, std::abs(a.values()[i] - b.values()[i]));
  return s;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g(1, 2.0, 41, 10, 1.0);
  CHECK(g.hx() == doctest::Approx(0.1));
  CHECK(g.ht() == doctest::Approx(0.1));
  CHECK(g.coord(0) == -2.0);
  CHECK(g.coord(40) == doctest::Approx(2.0));
  CHECK(g.time(10) == 1.0);
  CHECK(g.is_boundary(0));
  CHECK(g.is_boundary(40));
  CHECK(g.interior().size() == 39);

  const Grid g2(2, 1.0, 11, 4, 1.0);
  CHECK(g2.nodes() == 121);
  // corners lie outside the unit ball and are masked as boundary
  CHECK(g2.is_boundary(0));
  CHECK(!g2.is_boundary(60));
  CHECK(g2.axis_index(60, 0) == 5);
  CHECK(g2.axis_index(60, 1) == 5);

  const Grid s = Grid::from_steps(1, 4.0, 0.02, 2e-4, 1.0);
  CHECK(s.nx() == 401);
  CHECK(s.nt() == 5000);
}

TEST_CASE("multilinear sampling and interpolation") {
  const Grid g(2, 1.0, 11, 4, 1.0);
  GridField u(g);
  for (int n = 0; n <= g.nt(); ++n) {
    for (std::size_t k = 0; k < g.nodes(); ++k) {
      double x[2];
      g.node_x(k, x);
      u.at(n, k) = 1.0 + 2.0 * x[0] - x[1] + 0.5 * g.time(n);
    }
  }
  const double p[2] = {0.33, -0.71};
  CHECK(u.sample(0.6, p) == doctest::Approx(1.0 + 0.66 + 0.71 + 0.3));
  double grad[2];
  u.nodal_gradient(2, 60, grad);
  CHECK(grad[0] == doctest::Approx(2.0));
  CHECK(grad[1] == doctest::Approx(-1.0));

  const GridField fine = interpolate_to(u, Grid(2, 1.0, 21, 8, 1.0));
  for (std::size_t k = 0; k < fine.grid().nodes(); ++k) {
    double x[2];
    fine.grid().node_x(k, x);
    CHECK(fine.at(3, k) == doctest::Approx(1.0 + 2.0 * x[0] - x[1] + 0.5 * fine.grid().time(3)));
  }

  const GridField sub = restrict_to_box(interpolate_to(u, Grid(2, 1.0, 21, 4, 1.0)), 0.5);
  CHECK(sub.grid().radius() == doctest::Approx(0.5));
  CHECK(sub.grid().nx() == 11);
}

TEST_CASE("field binary and CSV output") {
  const fs::path dir = temp_dir("io");
  const Grid g(1, 2.0, 21, 4, 1.0);
  GridField u(g);
  for (std::size_t i = 0; i < u.values().size(); ++i) u.values()[i] = std::sin(0.1 * i) / 3.0;
  write_field_binary(dir / "u.bin", u);
  const GridField back = read_field_binary(dir / "u.bin");
  CHECK(back.grid().same_as(g));
  CHECK(sup_abs(back, u) == 0.0);
  CHECK_THROWS_AS(read_field_binary(dir / "missing.bin"), IoError);

  write_field_csv(dir / "u.csv", u, slice_levels(g, 3));
  std::ifstream in(dir / "u.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x1,u,ux1,residual_minmax,residual_maxmin,inC,inI");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3 * 21);
  CHECK(slice_levels(g, 3) == std::vector<int>{0, 2, 4});
}

TEST_CASE("gamma step: zero data gives zero") {
  const ConfigFile c = testing::zero();
  const SpecData data(c.spec);
  const Grid g(1, 4.0, 81, 50, 1.0);
  const GridField w = gamma_step(g, data, Penalty(0.1), 0.1, GridField(g));
  for (double v : w.values()) CHECK(v == 0.0);
}

TEST_CASE("gamma step: constant game with frozen one") {
  const ConfigFile c = testing::const1();
  const SpecData data(c.spec);
  const Grid g(1, 4.0, 81, 50, 1.0);
  const GridField w = gamma_step(g, data, Penalty(0.1), 0.1, GridField(g, 1.0));
  for (double v : w.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

  // discrete generator annihilates constants
  const DiscreteGenerator gen(g, c.spec);
  const std::vector<double> ones(g.nodes(), 1.0);
  for (std::size_t k : g.interior()) CHECK(std::abs(gen.apply(ones, k)) <= 1e-12);
}

TEST_CASE("gamma step: manufactured solution converges at second order") {
  // ∂_t w + w'' = -h with w = e^{-t} sin x (b = 0, σ = √2), so h = 2 e^{-t} sin x.
  // g = w supplies boundary and terminal data; the frozen field w + 1 keeps
  // (g - φ)⁺ = 0, and f = 10 keeps the gradient penalty at zero.
  const ConfigFile c =
      parse_config("dim = 1\nhorizon = 1\nrate = 0\ndrift[1] = 0\nsigma[1][1] = sqrt(2)\n"
                   "g = exp(-t)*sin(x1)\nh = 2*exp(-t)*sin(x1)\nf = 10\n");
  const SpecData data(c.spec);
  const double m = 3.0;
  double errors[3];
  for (int level = 0; level < 3; ++level) {
    const int nx = 20 * (1 << level) + 1;
    const double hx = 2 * m / (nx - 1);
    const int nt = static_cast<int>(std::lround(1.0 / (hx * hx)));
    const Grid g(1, m, nx, nt, 1.0);
    GridField frozen(g);
    GridField exact(g);
    for (int n = 0; n <= nt; ++n) {
      for (std::size_t k = 0; k < g.nodes(); ++k) {
        exact.at(n, k) = std::exp(-g.time(n)) * std::sin(g.coord(static_cast<int>(k)));
        frozen.at(n, k) = exact.at(n, k) + 1.0;
      }
    }
    errors[level] = sup_abs(gamma_step(g, data, Penalty(0.1), 0.5, frozen), exact);
  }
  const double order1 = std::log2(errors[0] / errors[1]);
  const double order2 = std::log2(errors[1] / errors[2]);
  INFO("errors " << errors[0] << " " << errors[1] << " " << errors[2]);
  CHECK(order1 >= 1.8);
  CHECK(order2 >= 1.8);
}

TEST_CASE("solve: zero data") {
  const ConfigFile c = testing::zero();
  const TruncatedData data(c.spec, 4.0);
  const Grid g(1, 4.0, 81, 100, 1.0);
  const PenaltyPoint p = solve_penalized(g, data, Penalty(0.1), 0.1);
  CHECK(p.iters == 1);
  CHECK(p.converged);
  for (double v : p.field.values()) CHECK(v == 0.0);
  CHECK(p.bounds_pass());
}

TEST_CASE("solve: constant game equals one on the inner box") {
  const ConfigFile c = testing::const1();
  const auto res = continuation(c.spec, geometric_schedule(0.5, 0.5, 6, 4.0),
                                fixed_grid_policy(1, 0.02, 2e-4, 1.0, false));
  const GridField inner = restrict_to_box(res.limit, 3.0);
  double err = 0.0;
  for (double v : inner.values()) err = std::max(err, std::abs(v - 1.0));
  CHECK(err <= 5e-3);
  for (const auto& p : res.points) CHECK(p.bounds_pass());
}

TEST_CASE("continuation with one point reproduces solve_penalized") {
  const ConfigFile c = testing::bench_ou();
  const Grid g = Grid::from_steps(1, 4.0, 0.05, 1e-3, 1.0);
  const auto res = continuation(c.spec, {{0.25, 0.25, 4.0}}, fixed_grid_policy(1, 0.05, 1e-3, 1.0, false));
  const TruncatedData data(c.spec, 4.0, std::min(0.005, g.hx() / 4.0));
  const PenaltyPoint direct = solve_penalized(g, data, Penalty(0.25), 0.25);
  CHECK(sup_abs(res.points.front().field, direct.field) == 0.0);
  CHECK(res.cauchy_increments.empty());
}

TEST_CASE("continuation on zero data has zero increments") {
  const ConfigFile c = testing::zero();
  const auto res =
      continuation(c.spec, geometric_schedule(0.5, 0.5, 3, 4.0), fixed_grid_policy(1, 0.05, 1e-3, 1.0, false));
  for (double d : res.cauchy_increments) CHECK(d == 0.0);
  CHECK_THROWS_AS(continuation(c.spec, {{0.1, 0.1, 4.0}, {0.2, 0.05, 4.0}},
                               fixed_grid_policy(1, 0.05, 1e-3, 1.0, false)),
                  ConfigError);
}

TEST_CASE("Newton and Picard agree") {
  const ConfigFile c = testing::bench_ou();
  const TruncatedData data(c.spec, 4.0);
  const Grid g = Grid::from_steps(1, 4.0, 0.05, 2e-3, 1.0);
  SolveOptions newton;
  newton.tol = 1e-10;
  SolveOptions picard = newton;
  picard.method = SolveOptions::Method::kPicard;
  picard.max_iter = 500;
  const PenaltyPoint a = solve_penalized(g, data, Penalty(0.25), 0.25, newton);
  const PenaltyPoint b = solve_penalized(g, data, Penalty(0.25), 0.25, picard);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(sup_abs(a.field, b.field) <= 1e-7);
}

TEST_CASE("penalty bound holds at every schedule point") {
  const ConfigFile c = testing::bench_ou();
  SolveOptions opts;
  opts.constants.K2 = 1.05;
  const auto res = continuation(c.spec, geometric_schedule(0.5, 0.25, 4, 4.0),
                                fixed_grid_policy(1, 0.04, 1e-3, 1.0, false), opts);
  for (const auto& p : res.points) {
    const BoundEntry& b = p.bound_report.at("obstacle_penalty");
    CHECK(b.observed <= 1.05 + 10 * opts.tol);
    CHECK(p.bound_report.at("obstacle_penalty_truncated").pass());
  }
}

TEST_CASE("VI report") {
  SUBCASE("zero data") {
    const ConfigFile c = testing::zero();
    const TruncatedData data(c.spec, 4.0);
    const Grid g(1, 4.0, 81, 100, 1.0);
    const GridField u(g);
    const VIReport r = vi_report(u, data, 0.1);
    CHECK(r.sup_minmax == 0.0);
    CHECK(r.sup_maxmin == 0.0);
    CHECK(r.evaluated_count > 0);
    std::size_t in_c = 0, in_i = 0;
    for (std::size_t i = 0; i < r.evaluated.size(); ++i) {
      if (!r.evaluated[i]) continue;
      in_c += r.in_C[i];
      in_i += r.in_I[i];
    }
    CHECK(in_c == 0);
    CHECK(in_i == r.evaluated_count);
  }
  SUBCASE("solved bench: terminal slice and order agreement") {
    const ConfigFile c = testing::bench_ou();
    const auto res = continuation(c.spec, geometric_schedule(0.5, 0.0625, 5, 4.0),
                                  fixed_grid_policy(1, 0.04, 1e-3, 1.0, false));
    const TruncatedData data(c.spec, 4.0);
    const VIReport r = vi_report(res.limit, data, 0.4);
    CHECK(r.terminal_mismatch == 0.0);
    CHECK(r.sup_order_gap <= 10 * 0.04);
    const fs::path dir = temp_dir("pgm");
    write_region_pgm_1d(dir / "r.pgm", r, slice_levels(res.limit.grid(), 11));
    std::ifstream in(dir / "r.pgm");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == res.limit.grid().nx());
    CHECK(h == 11);
    CHECK(maxval == 2);
  }
}

TEST_CASE("tabulated data reproduces nodal values") {
  const ConfigFile c = testing::bench_ou();
  const TruncatedData src(c.spec, 4.0);
  const Grid g(1, 4.0, 81, 10, 1.0);
  const TabulatedData tab(g, src);
  for (int i = 0; i < 81; i += 7) {
    const double x[1] = {g.coord(i)};
    CHECK(tab.g(0.3, x) == doctest::Approx(src.g(0.3, x)).epsilon(1e-14));
    CHECK(tab.f(0.3, x) == doctest::Approx(src.f(0.3, x)).epsilon(1e-14));
  }
  const double far[1] = {5.0};
  CHECK(tab.g(0.0, far) == src.g(0.0, far));
}
