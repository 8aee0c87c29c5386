#include "csgame/kernel/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "csgame/error.hpp"

namespace csgame {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TruncatedData::TruncatedData(const ProblemSpec& spec, double m, double sup_step)
    : spec_(spec), m_(m), cutoff_(m - 1.0) {
  if (m < 2.0) throw DataError("truncation radius m must be >= 2");
  const int d = spec.dim;
  const int n = static_cast<int>(std::ceil(2.0 * m / sup_step)) + 1;
  const int nt = spec.g.depends_on_time() ? 41 : 1;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = -m + 2.0 * m * idx[i] / (n - 1);
    if (norm(x) <= m) {
      for (int k = 0; k < nt; ++k) {
        const double t = nt == 1 ? 0.0 : spec.horizon * k / (nt - 1);
        g_norm_ = std::max(g_norm_, std::abs(spec.g.eval(t, x)));
      }
    }
    int j = 0;
    while (j < d && ++idx[j] == n) idx[j++] = 0;
    if (j == d) break;
  }
}

double TruncatedData::g(double t, std::span<const double> x) const {
  const double xi = cutoff_.value(x);
  return xi == 0.0 ? 0.0 : xi * spec_.g.eval(t, x);
}

double TruncatedData::h(double t, std::span<const double> x) const {
  const double xi = cutoff_.value(x);
  return xi == 0.0 ? 0.0 : xi * spec_.h.eval(t, x);
}

double TruncatedData::f(double t, std::span<const double> x) const {
  const double fv = spec_.f.eval(t, x);
  const double gx2 = cutoff_.gradient_norm_sq(x);
  if (gx2 == 0.0) return fv;

  const std::size_t d = x.size();
  std::vector<double> dxi(d);
  cutoff_.gradient(x, dxi);
  const Derivatives dg = eval_with_derivatives(spec_.g, t, x, 1, spec_.fd_step);
  double inner = 0.0;
  for (std::size_t i = 0; i < d; ++i) inner += dxi[i] * dg.gradient[i];
  const double radicand =
      fv * fv + g_norm_ * g_norm_ * gx2 + 2.0 * dg.value * cutoff_.value(x) * inner;
  if (radicand < -1e-12) {
    throw DataError(fmt::format("f_m radicand {} < 0 at |x|={}", radicand, norm(x)));
  }
  return std::sqrt(std::max(0.0, radicand));
}

void TruncatedData::grad_g(double t, std::span<const double> x, std::span<double> out) const {
  const std::size_t d = x.size();
  std::vector<double> dxi(d);
  cutoff_.gradient(x, dxi);
  const double xi = cutoff_.value(x);
  const Derivatives dg = eval_with_derivatives(spec_.g, t, x, 1, spec_.fd_step);
  for (std::size_t i = 0; i < d; ++i) out[i] = xi * dg.gradient[i] + dg.value * dxi[i];
}

}  // namespace csgame
