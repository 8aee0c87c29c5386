#include "csgame/sim/strategy.hpp"

#include <cmath>

#include "csgame/error.hpp"

namespace csgame {

FeedbackField::FeedbackField(GridField u) : u_(std::move(u)) {
  const Grid& g = u_.grid();
  grad_.assign(g.dim(), GridField(g));
  double grad[2];
  for (int n = 0; n <= g.nt(); ++n) {
    for (std::size_t k = 0; k < g.nodes(); ++k) {
      u_.nodal_gradient(n, k, grad);
      for (int a = 0; a < g.dim(); ++a) grad_[a].at(n, k) = grad[a];
    }
  }
}

namespace {

GridField resample_in_time(const GridField& u, int time_steps) {
  const Grid& g = u.grid();
  if (time_steps <= 0 || time_steps == g.nt()) return u;
  return interpolate_to(u, Grid(g.dim(), g.radius(), g.nx(), time_steps, g.horizon()));
}

}  // namespace

FeedbackField::FeedbackField(const GridField& u, int time_steps) : FeedbackField(resample_in_time(u, time_steps)) {}

bool FeedbackField::gradient(double t, std::span<const double> x, std::span<double> out) const noexcept {
  if (!u_.covers(x)) {
    for (int a = 0; a < dim(); ++a) out[a] = 0.0;
    return false;
  }
  for (int a = 0; a < dim(); ++a) out[a] = grad_[a].sample(t, x);
  return true;
}

Controller Controller::optimal(const FeedbackField& field, const GameData& data, const Penalty& pen) {
  Controller c;
  c.mode = Mode::kOptimal;
  c.field = &field;
  c.data = &data;
  c.pen = pen;
  return c;
}

Controller Controller::scaled(Controller base, double factor) {
  if (base.mode != Mode::kOptimal) throw ConfigError("only the optimal controller can be scaled");
  if (!(factor >= 0.0)) throw ConfigError("controller scale must be >= 0");
  base.scale *= factor;
  return base;
}

Controller Controller::rotated(Controller base, double angle) {
  if (base.mode != Mode::kOptimal) throw ConfigError("only the optimal controller can be rotated");
  base.angle += angle;
  return base;
}

Controller Controller::constant_push(std::vector<double> velocity) {
  Controller c;
  c.mode = Mode::kConstantPush;
  c.push = std::move(velocity);
  return c;
}

Controller Controller::impulse(double time, double size, std::vector<double> direction) {
  if (!(size >= 0.0)) throw ConfigError("impulse size must be >= 0");
  double n2 = 0.0;
  for (double v : direction) n2 += v * v;
  if (std::abs(n2 - 1.0) > 1e-12) throw ConfigError("impulse direction must be a unit vector");
  Controller c;
  c.mode = Mode::kImpulse;
  c.impulse_time = time;
  c.impulse_size = size;
  c.impulse_dir = std::move(direction);
  return c;
}

Controller::Action Controller::act(double t, std::span<const double> x) const {
  Action a;
  const int d = static_cast<int>(x.size());
  switch (mode) {
    case Mode::kIdle:
    case Mode::kImpulse:
      return a;
    case Mode::kConstantPush: {
      double s = 0.0;
      for (double v : push) s += v * v;
      s = std::sqrt(s);
      if (s > 0.0) {
        for (int i = 0; i < d; ++i) a.n[i] = push[i] / s;
        a.rate = s;
      }
      return a;
    }
    case Mode::kOptimal:
      break;
  }
  double grad[2];
  a.exited = !field->gradient(t, x, std::span<double>(grad, d));
  double g2 = 0.0;
  for (int i = 0; i < d; ++i) g2 += grad[i] * grad[i];
  a.grad_norm_sq = g2;
  if (g2 == 0.0) return a;  // idle; any unit vector would do
  const double f = data->f(t, x);
  a.f = f;
  a.has_f = true;
  const double dpsi = pen.d1(g2 - f * f);
  if (dpsi == 0.0) return a;
  const double gn = std::sqrt(g2);
  a.rate = scale * 2.0 * dpsi * gn;
  double n0 = -grad[0] / gn;
  double n1 = d == 2 ? -grad[1] / gn : 0.0;
  if (angle != 0.0) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    if (d == 1) {
      n0 *= c < 0.0 ? -1.0 : 1.0;
    } else {
      const double r0 = c * n0 - s * n1;
      n1 = s * n0 + c * n1;
      n0 = r0;
    }
  }
  a.n[0] = n0;
  a.n[1] = n1;
  return a;
}

Stopper Stopper::tau_star(const FeedbackField& field, const GameData& data, double band) {
  Stopper s;
  s.mode = Mode::kTauStar;
  s.field = &field;
  s.data = &data;
  s.band = band;
  return s;
}

Stopper Stopper::fixed(double tau) {
  Stopper s;
  s.mode = Mode::kFixed;
  s.tau = tau;
  return s;
}

Stopper Stopper::w_star(const FeedbackField& field, const GameData& data, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  Stopper s;
  s.mode = Mode::kWStar;
  s.field = &field;
  s.data = &data;
  s.delta = delta;
  return s;
}

Stopper Stopper::constant_w(double w) {
  if (!(w >= 0.0)) throw ConfigError("stopping intensity must be >= 0");
  Stopper s;
  s.mode = Mode::kConstantW;
  s.w = w;
  return s;
}

bool Stopper::stop(double t, std::span<const double> x) const {
  switch (mode) {
    case Mode::kTauStar:
      return field->value(t, x) <= data->g(t, x) + band;
    case Mode::kFixed:
      return t >= tau - 1e-12;
    default:
      throw ConfigError("stopping intensity used as a stopping rule");
  }
}

double Stopper::intensity(double t, std::span<const double> x) const {
  switch (mode) {
    case Mode::kWStar:
      return field->value(t, x) <= data->g(t, x) ? 1.0 / delta : 0.0;
    case Mode::kConstantW:
      return w;
    default:
      throw ConfigError("stopping rule used as a stopping intensity");
  }
}

}  // namespace csgame
