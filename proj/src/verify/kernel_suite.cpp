#include "csgame/verify/kernel_suite.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <random>

#include <fmt/format.h>

#include "csgame/kernel/cutoff.hpp"
#include "csgame/kernel/hamiltonian.hpp"
#include "csgame/kernel/truncation.hpp"

namespace csgame {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(uniform(rng, std::log(lo), std::log(hi))); }

// Returns the violation margin of one case (> 0 fails); writes a description
// when `why` is non-null.
template <class Case>
CheckResult run_check(std::string name, std::size_t cases, std::uint64_t seed, Exec exec, const Case& body) {
  std::vector<double> excess(cases);
  auto one = [&](std::size_t i, std::string* why) {
    Rng rng(stream_seed(seed, i));
    try {
      return body(rng, why);
    } catch (const std::exception& e) {
      if (why) *why = fmt::format("exception: {}", e.what());
      return std::numeric_limits<double>::infinity();
    }
  };
  if (exec == Exec::kParallel) {
    const auto n = static_cast<std::int64_t>(cases);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) excess[i] = one(static_cast<std::size_t>(i), nullptr);
  } else {
    for (std::size_t i = 0; i < cases; ++i) excess[i] = one(i, nullptr);
  }
  CheckResult r;
  r.name = std::move(name);
  r.cases = cases;
  r.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cases; ++i) {
    const double e = std::isnan(excess[i]) ? std::numeric_limits<double>::infinity() : excess[i];
    r.worst = std::max(r.worst, e);
    if (e > 0.0) {
      if (r.failures == 0) {
        std::string why;
        one(i, &why);
        r.first_failure = fmt::format("case {}: {}", i, why);
      }
      ++r.failures;
    }
  }
  return r;
}

std::uint64_t check_seed(std::uint64_t seed, std::uint64_t id) { return splitmix64(seed + 0x1000 * id); }

Penalty random_penalty(Rng& rng, Penalty::Bridge bridge) { return Penalty(log_uniform(rng, 1e-3, 0.5), bridge); }

void random_vector(Rng& rng, int d, double norm, double* y) {
  if (d == 1) {
    y[0] = uniform(rng, 0.0, 1.0) < 0.5 ? -norm : norm;
    return;
  }
  const double a = uniform(rng, 0.0, 2.0 * std::acos(-1.0));
  y[0] = norm * std::cos(a);
  y[1] = norm * std::sin(a);
}

}  // namespace

std::vector<CheckResult> kernel_invariant_suite(const KernelSuiteOptions& opts) {
  const std::size_t n = opts.cases;
  const auto bridge = opts.bridge;
  std::vector<CheckResult> out;

  // ψ(y) = 0 for y ≤ 0, ψ(2ε) = 1, ψ'(2ε) = 1/ε, linear branch (y − ε)/ε
  out.push_back(run_check("psi_anchor_values", n, check_seed(opts.seed, 1), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const Penalty pen = random_penalty(rng, bridge);
                            const double e = pen.eps();
                            const double yneg = -log_uniform(rng, 1e-12, 1e3);
                            const double ylin = 2.0 * e + log_uniform(rng, 1e-12, 1e3);
                            const double errs[] = {
                                std::abs(pen.value(yneg)) + std::abs(pen.d1(yneg)),
                                std::abs(pen.value(2.0 * e) - 1.0),
                                std::abs(pen.d1(2.0 * e) * e - 1.0),
                                std::abs(pen.value(ylin) - (ylin - e) / e) / (1.0 + ylin / e),
                            };
                            const double worst = *std::max_element(std::begin(errs), std::end(errs));
                            if (why) *why = fmt::format("eps={} anchor error {}", e, worst);
                            return worst - 1e-12;
                          }));

  // one-sided finite differences across the knots 0 and 2ε (scaled by ε, ε²)
  out.push_back(run_check("psi_c2_at_knots", n, check_seed(opts.seed, 2), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const Penalty pen = random_penalty(rng, bridge);
                            const double e = pen.eps();
                            const double y0 = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 2.0 * e;
                            const double h = 1e-7 * e;
                            const double d1_left = (pen.value(y0) - pen.value(y0 - h)) / h;
                            const double d1_right = (pen.value(y0 + h) - pen.value(y0)) / h;
                            const double d2_left = (pen.d1(y0) - pen.d1(y0 - h)) / h;
                            const double d2_right = (pen.d1(y0 + h) - pen.d1(y0)) / h;
                            const double jump1 = std::abs(d1_left - d1_right) * e;
                            const double jump2 = std::abs(d2_left - d2_right) * e * e;
                            if (why) *why = fmt::format("eps={} knot={} jumps: d1*eps {} d2*eps^2 {}", e, y0, jump1, jump2);
                            return std::max(jump1, jump2) - 1e-6;
                          }));

  // ψ'' ≥ 0 and ψ' ≥ 0 on a grid of [−ε, 3ε]; chord inequality at random triples
  out.push_back(run_check("psi_convex_nondecreasing", n, check_seed(opts.seed, 3), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const Penalty pen = random_penalty(rng, bridge);
                            const double e = pen.eps();
                            const double a = uniform(rng, -e, 3.0 * e);
                            const double b = uniform(rng, -e, 3.0 * e);
                            const double lam = uniform(rng, 0.0, 1.0);
                            const double mid = lam * a + (1.0 - lam) * b;
                            const double chord = lam * pen.value(a) + (1.0 - lam) * pen.value(b) - pen.value(mid);
                            const double curv = pen.d2(a) * e * e;
                            const double slope = pen.d1(a) * e;
                            const double worst = std::max({-chord - 1e-13, -curv - 1e-12, -slope});
                            if (why) {
                              *why = fmt::format("eps={} a={} b={} chord gap {} psi''*eps^2 {} psi'*eps {}", e, a, b,
                                                 chord, curv, slope);
                            }
                            return worst;
                          }));

  struct HCase {
    Penalty pen;
    double f;
    int d;
    double y[2];
    double ynorm;
  };
  auto h_case = [&](Rng& rng) {
    HCase c{random_penalty(rng, bridge), 0.0, 1, {0.0, 0.0}, 0.0};
    c.f = uniform(rng, 0.0, 1.0) < 0.1 ? 0.0 : uniform(rng, 0.0, 5.0);
    c.d = uniform(rng, 0.0, 1.0) < 0.5 ? 1 : 2;
    c.ynorm = log_uniform(rng, 1e-3, 1e3);
    random_vector(rng, c.d, c.ynorm, c.y);
    return c;
  };

  out.push_back(run_check("hamiltonian_lower_bound", n, check_seed(opts.seed, 4), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const HCase c = h_case(rng);
                            const double H = hamiltonian(c.pen, c.f, std::span<const double>(c.y, c.d)).H;
                            const double bound = 0.25 * c.pen.eps() * c.ynorm * c.ynorm;
                            if (why) *why = fmt::format("eps={} f={} |y|={} H={} bound={}", c.pen.eps(), c.f, c.ynorm, H, bound);
                            return bound - H - 1e-9 * (1.0 + std::abs(H));
                          }));

  out.push_back(run_check("hamiltonian_zero_at_origin", n, check_seed(opts.seed, 5), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const Penalty pen = random_penalty(rng, bridge);
                            const double f = uniform(rng, 0.0, 5.0);
                            const double zero[2] = {0.0, 0.0};
                            const HamiltonianValue v = hamiltonian(pen, f, std::span<const double>(zero, 2));
                            const double err = std::abs(v.H) + std::abs(v.p_star[0]) + std::abs(v.p_star[1]);
                            if (why) *why = fmt::format("eps={} f={} H(0)={}", pen.eps(), f, v.H);
                            return err;
                          }));

  out.push_back(run_check("hamiltonian_concavity_residual", n, check_seed(opts.seed, 6), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const HCase c = h_case(rng);
                            const double H = hamiltonian(c.pen, c.f, std::span<const double>(c.y, c.d)).H;
                            double p[2];
                            random_vector(rng, c.d, uniform(rng, 0.0, c.f + c.pen.eps() * c.ynorm + 1.0), p);
                            double yp = 0.0;
                            double p2 = 0.0;
                            for (int i = 0; i < c.d; ++i) {
                              yp += c.y[i] * p[i];
                              p2 += p[i] * p[i];
                            }
                            const double val = yp - c.pen.value(p2 - c.f * c.f);
                            if (why) *why = fmt::format("eps={} f={} |y|={} <y,p>-psi={} H={}", c.pen.eps(), c.f, c.ynorm, val, H);
                            return val - H - 1e-10 * std::max({1.0, std::abs(H), std::abs(yp)});
                          }));

  out.push_back(run_check("hamiltonian_obstacle_compatibility", n, check_seed(opts.seed, 7), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const HCase c = h_case(rng);
                            const double H = hamiltonian(c.pen, c.f, std::span<const double>(c.y, c.d)).H;
                            double q[2];
                            random_vector(rng, c.d, c.f * std::sqrt(uniform(rng, 0.0, 1.0)), q);
                            double yq = 0.0;
                            for (int i = 0; i < c.d; ++i) yq += c.y[i] * q[i];
                            if (why) *why = fmt::format("eps={} f={} |y|={} H={} -<y,q>={}", c.pen.eps(), c.f, c.ynorm, H, -yq);
                            return -yq - H - 1e-10 * std::max({1.0, std::abs(H), std::abs(yq)});
                          }));

  // larger f relaxes the penalty, so H grows with f (and falls in t)
  out.push_back(run_check("hamiltonian_monotone_in_f", n, check_seed(opts.seed, 8), opts.exec,
                          [&](Rng& rng, std::string* why) {
                            const HCase c = h_case(rng);
                            const double f_big = c.f + uniform(rng, 0.0, 2.0);
                            const auto y = std::span<const double>(c.y, c.d);
                            const double H_small = hamiltonian(c.pen, c.f, y).H;
                            const double H_big = hamiltonian(c.pen, f_big, y).H;
                            if (why) *why = fmt::format("eps={} f={} -> {} H {} -> {}", c.pen.eps(), c.f, f_big, H_small, H_big);
                            return H_small - H_big - 1e-10 * std::max(1.0, std::abs(H_big));
                          }));

  // |∇ξ_m|² ≤ C0 ξ_m: half the cases on a radial grid of the transition band, half random points
  {
    std::vector<std::unique_ptr<Cutoff>> cutoffs;
    for (int m = 1; m <= 4; ++m) cutoffs.push_back(std::make_unique<Cutoff>(m));
    out.push_back(run_check("cutoff_gradient_bound", n, check_seed(opts.seed, 9), opts.exec,
                            [&](Rng& rng, std::string* why) {
                              const auto pick = static_cast<std::size_t>(uniform(rng, 0.0, 4.0));
                              const Cutoff& cut = *cutoffs[std::min<std::size_t>(pick, 3)];
                              const double r = cut.radius() + uniform(rng, -0.1, 1.1);
                              double x[2];
                              const int d = uniform(rng, 0.0, 1.0) < 0.5 ? 1 : 2;
                              random_vector(rng, d, r, x);
                              const auto xs = std::span<const double>(x, d);
                              const double g2 = cut.gradient_norm_sq(xs);
                              const double xi = cut.value(xs);
                              if (why) *why = fmt::format("m={} |x|={} |grad xi|^2={} C0*xi={}", cut.radius(), r, g2, cut.C0() * xi);
                              return g2 - cut.C0() * xi - 1e-15;
                            }));
    // deterministic radial sweep of the band
    CheckResult& last = out.back();
    const Cutoff& cut = *cutoffs[0];
    for (std::size_t k = 0; k < n; ++k) {
      const double r = cut.radius() + (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      const double x[1] = {r};
      const double excess = cut.gradient_norm_sq(x) - cut.C0() * cut.value(x) - 1e-15;
      last.worst = std::max(last.worst, excess);
      if (excess > 0.0) {
        if (last.failures == 0) last.first_failure = fmt::format("radial grid |x|={} excess {}", r, excess);
        ++last.failures;
      }
    }
    last.cases += n;
  }

  // |∇g_m| ≤ f_m on B̄_m and g_m = g, f_m = f on 𝓞_{m−1}
  std::uint64_t id = 100;
  for (const ProblemSpec* spec : opts.specs) {
    std::vector<std::unique_ptr<TruncatedData>> data;
    for (double m : opts.radii) data.push_back(std::make_unique<TruncatedData>(*spec, m));
    out.push_back(run_check(fmt::format("truncated_data_compatibility[{}]", spec->name), n,
                            check_seed(opts.seed, id++), opts.exec, [&](Rng& rng, std::string* why) {
                              const auto pick = static_cast<std::size_t>(uniform(rng, 0.0, 1.0) * data.size());
                              const TruncatedData& dm = *data[std::min(pick, data.size() - 1)];
                              const double m = dm.radius();
                              const int d = spec->dim;
                              double x[2];
                              const double r = uniform(rng, 0.0, 1.0) < 0.5 ? uniform(rng, 0.0, m)
                                                                             : uniform(rng, m - 1.5, m);
                              random_vector(rng, d, std::max(0.0, r), x);
                              const auto xs = std::span<const double>(x, d);
                              const double t = uniform(rng, 0.0, spec->horizon);
                              double grad[2] = {0.0, 0.0};
                              dm.grad_g(t, xs, std::span<double>(grad, d));
                              double gn2 = 0.0;
                              for (int i = 0; i < d; ++i) gn2 += grad[i] * grad[i];
                              const double fm = dm.f(t, xs);
                              double excess = std::sqrt(gn2) - fm - 1e-6 * (1.0 + fm);
                              if (r <= m - 1.0) {
                                const double f = spec->f.eval(t, xs);
                                const double g = spec->g.eval(t, xs);
                                excess = std::max({excess, std::abs(fm - f) - 1e-12 * (1.0 + std::abs(f)),
                                                   std::abs(dm.g(t, xs) - g) - 1e-12 * (1.0 + std::abs(g))});
                              }
                              if (why) {
                                *why = fmt::format("m={} t={} |x|={} |grad g_m|={} f_m={}", m, t, r, std::sqrt(gn2), fm);
                              }
                              return excess;
                            }));
  }
  return out;
}

}  // namespace csgame
