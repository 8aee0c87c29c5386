#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "csgame/error.hpp"
#include "csgame/model/assumptions.hpp"
#include "csgame/model/expression.hpp"
#include "csgame/model/problem.hpp"
#include "helpers.hpp"

using namespace csgame;

namespace {
double eval1(const char* src, double t, double x) {
  const double xs[1] = {x};
  return parse_expression(src, 1).eval(t, xs);
}
}  // namespace

TEST_CASE("expression arithmetic") {
  CHECK(eval1("x1^2 + 1", 0.0, 2.0) == 5.0);
  CHECK(eval1("exp(0)", 0.0, 0.0) == 1.0);
  CHECK(eval1("min(t, x1)", 0.3, 0.7) == 0.3);
  CHECK(eval1("2^3^2", 0.0, 0.0) == 512.0);
  CHECK(eval1("-2^2", 0.0, 0.0) == -4.0);
  CHECK(eval1("1 - 2 - 3", 0.0, 0.0) == -4.0);
  CHECK(eval1("8 / 4 / 2", 0.0, 0.0) == 1.0);
  CHECK(eval1("max(t, x1) * pi", 1.0, 0.5) == doctest::Approx(M_PI));
  const double x2[2] = {3.0, 4.0};
  CHECK(parse_expression("sqrt(x1^2 + x2^2)", 2).eval(0.0, x2) == 5.0);
}

TEST_CASE("expression errors carry kind and offset") {
  auto kind_of = [](const char* src, int dim) {
    try {
      parse_expression(src, dim);
    } catch (const ExpressionError& e) {
      return std::pair{e.kind(), e.offset()};
    }
    return std::pair{ExpressionError::Kind::kDomain, std::size_t{999}};
  };
  CHECK(kind_of("x1 + y", 1) == std::pair{ExpressionError::Kind::kUnknownIdentifier, std::size_t{5}});
  CHECK(kind_of("x2", 1).first == ExpressionError::Kind::kUnknownIdentifier);
  CHECK(kind_of("min(1)", 1).first == ExpressionError::Kind::kArity);
  CHECK(kind_of("1 +", 1).first == ExpressionError::Kind::kSyntax);
  CHECK(kind_of("(1 + 2", 1).first == ExpressionError::Kind::kSyntax);

  const double x[1] = {0.0};
  CHECK_THROWS_AS(parse_expression("1 / x1", 1).eval(0.0, x), ExpressionError);
  CHECK_THROWS_AS(parse_expression("log(x1)", 1).eval(0.0, x), ExpressionError);
  CHECK_THROWS_AS(parse_expression("sqrt(x1 - 1)", 1).eval(0.0, x), ExpressionError);
}

TEST_CASE("expression print round-trips bit-identically") {
  const Expression e = parse_expression("exp(-x1^2) * 0.1 + tanh(t / 3) - abs(x1)", 1);
  const Expression back = parse_expression(e.print(), 1);
  for (double x : {-2.3, -0.1, 0.0, 0.7, 1.9}) {
    const double xs[1] = {x};
    CHECK(e.eval(0.4, xs) == back.eval(0.4, xs));
  }
  CHECK(parse_expression("3", 1).is_constant());
  CHECK(!parse_expression("x1", 1).is_constant());
  CHECK(parse_expression("t*x1", 1).depends_on_time());
  CHECK(!parse_expression("x1", 1).depends_on_time());
}

TEST_CASE("expression evaluation is thread-safe") {
  const Expression e = parse_expression("sin(x1) * exp(-t) + x1^3", 1);
  std::vector<double> serial(4000), parallel(4000);
  for (int i = 0; i < 4000; ++i) {
    const double x[1] = {i * 1e-3};
    serial[i] = e.eval(0.5, x);
  }
  std::vector<std::thread> threads;
  for (int k = 0; k < 4; ++k) {
    threads.emplace_back([&, k] {
      for (int i = k; i < 4000; i += 4) {
        const double x[1] = {i * 1e-3};
        parallel[i] = e.eval(0.5, x);
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(serial == parallel);
}

TEST_CASE("finite-difference derivatives") {
  const double x3[1] = {3.0};
  const Derivatives sq = eval_with_derivatives(parse_expression("x1^2", 1), 0.0, x3, 1);
  CHECK(sq.value == 9.0);
  CHECK(sq.gradient[0] == doctest::Approx(6.0).epsilon(1e-6));

  const double x0[1] = {0.0};
  const Derivatives one = eval_with_derivatives(parse_expression("1", 1), 0.0, x0, 2);
  CHECK(one.value == 1.0);
  CHECK(one.gradient[0] == 0.0);
  CHECK(one.hessian[0] == 0.0);

  // d²/dx² exp(-x²) = (4x² - 2) exp(-x²) = -2 at x = 0
  const Derivatives bump = eval_with_derivatives(parse_expression("exp(-x1^2)", 1), 0.0, x0, 2);
  CHECK(std::abs(bump.hessian[0] - (-2.0)) <= 1e-4);

  const double x[2] = {0.3, -0.4};
  const Derivatives mixed = eval_with_derivatives(parse_expression("x1*x2 + x2^2", 2), 0.0, x, 2);
  CHECK(mixed.hessian[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(mixed.hessian[2] == mixed.hessian[1]);
  CHECK(mixed.hessian[3] == doctest::Approx(2.0).epsilon(1e-4));

  const Expression te = parse_expression("t^2 * x1", 1);
  const double x1[1] = {2.0};
  CHECK(time_derivative(te, 0.5, x1, 1.0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(time_derivative(te, 1.0, x1, 1.0) == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("config parsing") {
  const ConfigFile cfg = testing::bench_ou();
  CHECK(cfg.spec.name == "bench-ou");
  CHECK(cfg.spec.dim == 1);
  CHECK(cfg.spec.rate == 0.05);
  const double x[1] = {1.0};
  CHECK(cfg.spec.g.eval(0.0, x) == doctest::Approx(std::exp(-1.0)));
  double a[1];
  cfg.spec.diffusion_at(x, a);
  CHECK(a[0] == 1.0);

  CHECK_THROWS_AS(parse_config("dim = 1\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dim = 1\ng = 1 +\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dim = 1\n[solve]\nunknown = 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/problem.ini"), ConfigError);

  const ConfigFile two = parse_config(
      "dim = 2\ndrift[1] = -x1\ndrift[2] = -x2\nsigma[1][1] = 1\nsigma[2][2] = 2\ng = 0\nh = 0\nf = 1\n"
      "[solve]\ngrid = 3,31,10\n");
  CHECK(two.spec.dim == 2);
  CHECK(two.sections.at("solve").at("grid") == "3,31,10");
  const double y[2] = {0.0, 0.0};
  double a2[4];
  two.spec.diffusion_at(y, a2);
  CHECK(a2[0] == 1.0);
  CHECK(a2[1] == 0.0);
  CHECK(a2[3] == 4.0);

  // canonical text does not depend on comments and spacing
  const ConfigFile c1 = parse_config("; comment\ndim = 1\ng = 1\nh=0\nf=1\ndrift[1]=-x1\nsigma[1][1]=1\n");
  const ConfigFile c2 = parse_config("dim=1\n  g = 1\nh = 0\nf = 1\ndrift[1] = -x1\nsigma[1][1] = 1\n");
  CHECK(c1.canonical_text == c2.canonical_text);
  CHECK(parse_double_list("0.5, 0.0625,9") == std::vector<double>{0.5, 0.0625, 9.0});
}

TEST_CASE("theta of the OU bump") {
  // h + L g - r g with g = exp(-x²), b = -x, σ = 1: L g = ½ g'' - x g' = (4x² - 1) g
  const ConfigFile cfg = testing::bench_ou();
  for (double x : {-1.5, 0.0, 0.4, 2.0}) {
    const double xs[1] = {x};
    const double g = std::exp(-x * x);
    CHECK(cfg.spec.theta(0.2, xs) == doctest::Approx((4 * x * x - 1) * g - 0.05 * g).epsilon(1e-6));
  }
}

TEST_CASE("assumption validation") {
  const ConfigFile c = testing::const1();
  const AssumptionReport rep = validate_assumptions(c.spec, c.spec.sample_plan);
  CHECK(rep.valid());
  CHECK(rep.Theta_min == doctest::Approx(0.0));
  CHECK(rep.K2 == 0.0);
  CHECK(rep.grad_g_le_f_margin == doctest::Approx(1.0));
  CHECK(rep.min_a_eigenvalue == doctest::Approx(1.0));

  const ConfigFile ft = testing::ou_config("0", "0", "t", 0.0);
  const AssumptionReport rft = validate_assumptions(ft.spec, ft.spec.sample_plan);
  CHECK(!rft.valid());
  CHECK(!rft.f_time_monotone);

  const ConfigFile gr = testing::ou_config("2*x1", "0", "1", 0.0);
  const AssumptionReport rgr = validate_assumptions(gr.spec, gr.spec.sample_plan);
  CHECK(!rgr.valid());
  CHECK(rgr.grad_g_le_f_margin == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rgr.violation_counts.count("grad_g_le_f") == 1);

  const ConfigFile degenerate = parse_config("dim = 1\ndrift[1] = 0\nsigma[1][1] = 0\ng = 0\nh = 0\nf = 1\n");
  CHECK(validate_assumptions(degenerate.spec, degenerate.spec.sample_plan).violation_counts.count("local_ellipticity") ==
        1);
}

TEST_CASE("assumption validation: serial and parallel agree exactly") {
  const ConfigFile c = testing::bench_ou();
  const AssumptionReport a = validate_assumptions(c.spec, c.spec.sample_plan, Exec::kSerial);
  const AssumptionReport b = validate_assumptions(c.spec, c.spec.sample_plan, Exec::kParallel);
  CHECK(a.K0 == b.K0);
  CHECK(a.K1 == b.K1);
  CHECK(a.K2 == b.K2);
  CHECK(a.Theta_min == b.Theta_min);
  CHECK(a.grad_g_le_f_margin == b.grad_g_le_f_margin);
  CHECK(a.samples == b.samples);
  // Θ_min of the bump is -(1 + r) at x = 0, so K2 = 1.05
  CHECK(a.K2 == doctest::Approx(1.05).epsilon(1e-6));
}

TEST_CASE("pairwise sum and seeds") {
  std::vector<double> v(1001);
  for (int i = 0; i < 1001; ++i) v[i] = 0.1 * i;
  CHECK(pairwise_sum(v) == doctest::Approx(0.1 * 1000 * 1001 / 2));
  CHECK(pairwise_sum({}) == 0.0);
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 5) == stream_seed(1, 5));
  CHECK(stream_seed(2, 5) != stream_seed(1, 5));
}
