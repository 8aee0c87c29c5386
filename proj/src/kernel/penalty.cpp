#include "csgame/kernel/penalty.hpp"

#include "csgame/error.hpp"

namespace csgame {

Penalty::Penalty(double eps, Bridge bridge) : eps_(eps), bridge_(bridge) {
  if (!(eps > 0.0 && eps < 1.0)) throw DataError("penalty eps must lie in (0,1)");
}

double Penalty::value(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= 2.0 * eps_) return (y - eps_) / eps_;
  const double s = y / (2.0 * eps_);
  if (bridge_ == Bridge::kBrokenForTesting) return s * s * s * (4.0 - 3.0 * s);
  return s * s * s * (2.0 - s);
}

double Penalty::d1(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= 2.0 * eps_) return 1.0 / eps_;
  const double s = y / (2.0 * eps_);
  if (bridge_ == Bridge::kBrokenForTesting) return (12.0 * s * s - 12.0 * s * s * s) / (2.0 * eps_);
  return (6.0 * s * s - 4.0 * s * s * s) / (2.0 * eps_);
}

double Penalty::d2(double y) const {
  if (y <= 0.0 || y >= 2.0 * eps_) return 0.0;
  const double s = y / (2.0 * eps_);
  if (bridge_ == Bridge::kBrokenForTesting) return (24.0 * s - 36.0 * s * s) / (4.0 * eps_ * eps_);
  return (12.0 * s - 12.0 * s * s) / (4.0 * eps_ * eps_);
}

double Penalty::operator()(double y, int order) const {
  switch (order) {
    case 0:
      return value(y);
    case 1:
      return d1(y);
    default:
      return d2(y);
  }
}

}  // namespace csgame
