#include "csgame/kernel/cutoff.hpp"

#include <algorithm>
#include <cmath>

#include "csgame/error.hpp"

namespace csgame {

namespace {

// s(z) = 1/(1-z) - 1/z, so that ξ = 1/(1+e^s).
double bridge_exponent(double z) { return 1.0 / (1.0 - z) - 1.0 / z; }

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double bridge(double z) {
  if (z <= 0.0) return 1.0;
  if (z >= 1.0) return 0.0;
  const double s = bridge_exponent(z);
  if (s > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(s));
}

double bridge_derivative(double z) {
  if (z <= 0.0 || z >= 1.0) return 0.0;
  const double xi = bridge(z);
  const double ds = 1.0 / ((z - 1.0) * (z - 1.0)) + 1.0 / (z * z);
  return -xi * (1.0 - xi) * ds;
}

double certified_cutoff_constant(int points) {
  double best = 0.0;
  for (int i = 1; i < points; ++i) {
    const double z = static_cast<double>(i) / points;
    const double xi = bridge(z);
    if (xi <= 0.0) continue;
    const double d = bridge_derivative(z);
    best = std::max(best, d * d / xi);
  }
  return 1.01 * best;
}

Cutoff::Cutoff(double m) : m_(m) {
  if (!(m >= 0.0)) throw DataError("cutoff radius must be nonnegative");
  static const double c0 = certified_cutoff_constant();
  c0_ = c0;
}

double Cutoff::value(std::span<const double> x) const { return bridge(norm(x) - m_); }

void Cutoff::gradient(std::span<const double> x, std::span<double> grad) const {
  const double r = norm(x);
  const double d = bridge_derivative(r - m_);
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = (d == 0.0 || r == 0.0) ? 0.0 : x[i] / r * d;
}

double Cutoff::gradient_norm_sq(std::span<const double> x) const {
  const double d = bridge_derivative(norm(x) - m_);
  return d * d;
}

}  // namespace csgame
