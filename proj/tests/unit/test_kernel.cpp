#include <doctest.h>

#include <cmath>
#include <vector>

#include "csgame/error.hpp"
#include "csgame/kernel/cutoff.hpp"
#include "csgame/kernel/hamiltonian.hpp"
#include "csgame/kernel/penalty.hpp"
#include "csgame/kernel/truncation.hpp"
#include "csgame/verify/kernel_suite.hpp"
#include "helpers.hpp"

using namespace csgame;

TEST_CASE("cutoff bridge") {
  CHECK(bridge(-1.0) == 1.0);
  CHECK(bridge(0.0) == 1.0);
  CHECK(bridge(1.0) == 0.0);
  CHECK(bridge(2.0) == 0.0);
  CHECK(bridge(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (double z = 0.01; z < 1.0; z += 0.01) {
    CHECK(bridge(z + 0.005) <= bridge(z));
    const double fd = (bridge(z + 1e-6) - bridge(z - 1e-6)) / 2e-6;
    CHECK(bridge_derivative(z) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("cutoff function") {
  const Cutoff cut(3.0);
  const double on[1] = {3.0};
  const double off[1] = {4.0};
  const double inside[2] = {1.0, -2.0};
  CHECK(cut.value(on) == 1.0);
  CHECK(cut.value(off) == 0.0);
  CHECK(cut.value(inside) == 1.0);
  double g[2];
  cut.gradient(inside, g);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  // gradient of ξ(|x| - m) points along x
  const double x[2] = {3.0, 0.4};
  cut.gradient(x, g);
  const double r = std::hypot(3.0, 0.4);
  CHECK(g[0] * 0.4 == doctest::Approx(g[1] * 3.0));
  CHECK(g[0] == doctest::Approx(3.0 / r * bridge_derivative(r - 3.0)));
  // |∇ξ_m|² ≤ C0 ξ_m on a radial sweep
  for (double s = 3.0; s <= 4.0; s += 1e-3) {
    const double y[1] = {s};
    CHECK(cut.gradient_norm_sq(y) <= cut.C0() * cut.value(y) + 1e-300);
  }
}

TEST_CASE("penalty anchor values") {
  for (double eps : {1e-3, 0.1, 0.5}) {
    const Penalty pen(eps);
    CHECK(pen.value(-1.0) == 0.0);
    CHECK(pen.value(0.0) == 0.0);
    CHECK(pen.value(2 * eps) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pen.d1(2 * eps) == doctest::Approx(1.0 / eps).epsilon(1e-12));
    CHECK(pen.d2(2 * eps) == doctest::Approx(0.0).scale(1.0 / (eps * eps)));
    CHECK(pen.value(3 * eps) == doctest::Approx(2.0));
    CHECK(pen(3 * eps, 1) == pen.d1(3 * eps));
  }
  // 2s³ - s⁴ at s = y / 2ε = 0.5
  CHECK(Penalty(0.1).value(0.1) == doctest::Approx(2 * 0.125 - 0.0625).epsilon(1e-15));
  CHECK(Penalty(0.1).value(0.1) == doctest::Approx(0.1875));
}

TEST_CASE("penalty derivatives match finite differences") {
  const Penalty pen(0.2);
  for (double y = -0.1; y < 0.6; y += 0.013) {
    const double h = 1e-6;
    CHECK(pen.d1(y) == doctest::Approx((pen.value(y + h) - pen.value(y - h)) / (2 * h)).epsilon(1e-6));
    CHECK(pen.d2(y) == doctest::Approx((pen.d1(y + h) - pen.d1(y - h)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("hamiltonian: zero at the origin and lower bound") {
  const Penalty pen(0.1);
  const std::vector<double> zero{0.0, 0.0};
  const HamiltonianValue h0 = hamiltonian(pen, 1.0, zero);
  CHECK(h0.H == 0.0);
  CHECK(h0.p_star == std::vector<double>{0.0, 0.0});
  for (double f : {0.0, 0.3, 2.0}) {
    for (double y : {0.01, 0.5, 3.0, 40.0}) {
      CHECK(hamiltonian_radial(pen, f, y) >= 0.1 * y * y / 4 - 1e-12);
    }
  }
}

TEST_CASE("hamiltonian matches a brute-force grid search") {
  // sup over p in [-5,5]² with step 1e-3 of <y,p> - ψ(|p|² - f²)
  const Penalty pen(0.1);
  const double f = 1.0, y0 = 2.0, y1 = 0.0;
  double best = -1e300;
  const int n = 10000;
  for (int i = 0; i <= n; ++i) {
    const double p0 = -5.0 + i * 1e-3;
    for (int j = 0; j <= n; ++j) {
      const double p1 = -5.0 + j * 1e-3;
      best = std::max(best, y0 * p0 + y1 * p1 - pen.value(p0 * p0 + p1 * p1 - f * f));
    }
  }
  const std::vector<double> y{y0, y1};
  const HamiltonianValue hv = hamiltonian(pen, f, y);
  CHECK(std::abs(hv.H - best) <= 1e-4);
  CHECK(hv.p_star[1] == 0.0);
  CHECK(hv.p_star[0] > f);
}

TEST_CASE("hamiltonian first-order condition") {
  const Penalty pen(0.05);
  for (double f : {0.0, 0.5, 1.5}) {
    for (double y : {0.1, 1.0, 10.0, 100.0}) {
      double rho = 0.0;
      const double H = hamiltonian_radial(pen, f, y, &rho);
      CHECK(2.0 * pen.d1(rho * rho - f * f) * rho == doctest::Approx(y).epsilon(1e-9));
      CHECK(H == doctest::Approx(y * rho - pen.value(rho * rho - f * f)).epsilon(1e-12));
      // nondecreasing in f
      CHECK(hamiltonian_radial(pen, f + 0.1, y) >= H - 1e-12);
    }
  }
}

TEST_CASE("truncated data") {
  const ConfigFile c = testing::bench_ou();
  const TruncatedData data(c.spec, 4.0);
  for (double x : {-2.9, 0.0, 1.3, 3.0}) {
    const double xs[1] = {x};
    CHECK(data.f(0.3, xs) == doctest::Approx(c.spec.f.eval(0.3, xs)).epsilon(1e-14));
    CHECK(data.g(0.3, xs) == c.spec.g.eval(0.3, xs));
  }
  for (double x : {-5.0, -4.0, 4.0, 4.5}) {
    const double xs[1] = {x};
    CHECK(data.g(0.0, xs) == 0.0);
    CHECK(data.h(0.0, xs) == 0.0);
  }
  // |∇g_m| ≤ f_m across the annulus
  for (double x = 2.5; x <= 4.2; x += 1e-3) {
    const double xs[1] = {x};
    double grad[1];
    data.grad_g(0.0, xs, grad);
    CHECK(std::abs(grad[0]) <= data.f(0.0, xs) + 1e-9);
  }

  const ConfigFile one = testing::const1();
  const TruncatedData d1(one.spec, 4.0);
  for (double x = 2.8; x <= 4.1; x += 0.05) {
    const double xs[1] = {x};
    CHECK(d1.f(0.0, xs) * d1.f(0.0, xs) ==
          doctest::Approx(1.0 + d1.cutoff().gradient_norm_sq(xs)).epsilon(1e-12));
  }
  CHECK(d1.g_sup_norm() == 1.0);
}

TEST_CASE("kernel invariant suite") {
  const ConfigFile c = testing::bench_ou();
  KernelSuiteOptions opts;
  opts.cases = 2000;
  opts.specs = {&c.spec};
  const auto results = kernel_invariant_suite(opts);
  CHECK(results.size() >= 10);
  for (const auto& r : results) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.pass());
  }

  SUBCASE("serial and parallel agree") {
    opts.exec = Exec::kSerial;
    const auto serial = kernel_invariant_suite(opts);
    REQUIRE(serial.size() == results.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].failures == results[i].failures);
      CHECK(serial[i].worst == results[i].worst);
    }
  }

  SUBCASE("a broken bridge is detected") {
    opts.bridge = Penalty::Bridge::kBrokenForTesting;
    const auto broken = kernel_invariant_suite(opts);
    bool convexity_failed = false;
    for (const auto& r : broken) {
      if (r.name == "psi_convex_nondecreasing") convexity_failed = !r.pass();
    }
    CHECK(convexity_failed);
  }
}
