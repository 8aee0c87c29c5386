#include "csgame/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include <fmt/format.h>

#include "csgame/error.hpp"
#include "csgame/kernel/hamiltonian.hpp"

namespace csgame {

namespace {

constexpr int kMaxNoise = 8;

struct Outcome {
  double terminal = 0.0;
  double running = 0.0;
  double control = 0.0;
  bool ok = true;
  bool exited = false;
};

class Normals {
 public:
  Normals(std::uint64_t seed, double sign) : engine_(seed), sign_(sign) {}
  double next() { return sign_ * dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
  double sign_;
};

// ∫_0^dt e^{−κs} ds
double step_weight(double kappa, double dt) { return kappa > 0.0 ? -std::expm1(-kappa * dt) / kappa : dt; }

void check_common(const ProblemSpec& spec, const StartPoint& start, const Controller& ctrl, const PathConfig& cfg) {
  if (cfg.n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (cfg.n_paths < 2) throw ConfigError("n_paths must be >= 2");
  if (cfg.antithetic && (cfg.n_paths % 2 != 0 || cfg.n_paths < 4)) {
    throw ConfigError("antithetic sampling needs an even n_paths >= 4");
  }
  if (cfg.jump_quadrature_points < 1) throw ConfigError("jump_quadrature_points must be >= 1");
  if (static_cast<int>(start.x0.size()) != spec.dim) {
    throw ConfigError(fmt::format("start point has {} coordinates, problem dimension is {}", start.x0.size(), spec.dim));
  }
  if (spec.noise_dim > kMaxNoise) throw ConfigError(fmt::format("noise dimension above {}", kMaxNoise));
  if (!(start.t0 >= 0.0 && start.t0 < spec.horizon)) throw ConfigError("start time must lie in [0, T)");
  const auto dim = static_cast<std::size_t>(spec.dim);
  switch (ctrl.mode) {
    case Controller::Mode::kOptimal:
      if (!ctrl.field || !ctrl.data || ctrl.field->dim() != spec.dim) {
        throw ConfigError("optimal controller needs a field of the problem dimension");
      }
      if (spec.dim == 1 && std::abs(std::sin(ctrl.angle)) > 1e-12) {
        throw ConfigError("in one dimension the direction can only be kept or reversed");
      }
      break;
    case Controller::Mode::kConstantPush:
      if (ctrl.push.size() != dim) throw ConfigError("push vector has the wrong dimension");
      break;
    case Controller::Mode::kImpulse:
      if (ctrl.impulse_dir.size() != dim) throw ConfigError("impulse direction has the wrong dimension");
      break;
    case Controller::Mode::kIdle:
      break;
  }
}

void check_stopper(const ProblemSpec& spec, const Stopper& s) {
  if ((s.mode == Stopper::Mode::kTauStar || s.mode == Stopper::Mode::kWStar) &&
      (!s.field || !s.data || s.field->dim() != spec.dim)) {
    throw ConfigError("feedback stopper needs a field of the problem dimension");
  }
}

template <class PathFn>
PayoffEstimate run_paths(const PathConfig& cfg, const StartPoint& start, double dt, Exec exec, PathFn&& path) {
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<Outcome> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto one = [&](std::size_t i) {
    const std::uint64_t unit = cfg.antithetic ? i / 2 : i;
    const double sign = cfg.antithetic && (i % 2 == 1) ? -1.0 : 1.0;
    Normals z(stream_seed(cfg.seed, unit), sign);
    try {
      path(z, out[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
    const Outcome& o = out[i];
    if (!std::isfinite(o.terminal) || !std::isfinite(o.running) || !std::isfinite(o.control)) out[i].ok = false;
  };
  if (exec == Exec::kParallel) {
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) one(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  PayoffEstimate est;
  est.t0 = start.t0;
  est.dt = dt;
  est.n_steps = cfg.n_steps;
  est.antithetic = cfg.antithetic;
  est.seed = cfg.seed;
  std::vector<double> term, run, ctl;
  term.reserve(n);
  run.reserve(n);
  ctl.reserve(n);
  for (const Outcome& o : out) {
    if (!o.ok) {
      ++est.rejected;
      continue;
    }
    if (o.exited) ++est.exited;
    term.push_back(o.terminal);
    run.push_back(o.running);
    ctl.push_back(o.control);
  }
  if (static_cast<double>(est.rejected) > 0.01 * static_cast<double>(n)) {
    throw SimulationError(fmt::format("{} of {} paths produced non-finite values", est.rejected, n));
  }
  est.n_paths = term.size();
  const auto acc = static_cast<double>(est.n_paths);
  est.exit_fraction = static_cast<double>(est.exited) / acc;
  est.breakdown.terminal = pairwise_sum(term) / acc;
  est.breakdown.running = pairwise_sum(run) / acc;
  est.breakdown.control = pairwise_sum(ctl) / acc;
  est.mean = est.breakdown.terminal + est.breakdown.running + est.breakdown.control;

  std::vector<double> units;
  units.reserve(n);
  auto total = [](const Outcome& o) { return o.terminal + o.running + o.control; };
  if (cfg.antithetic) {
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      if (out[i].ok && out[i + 1].ok) units.push_back(0.5 * (total(out[i]) + total(out[i + 1])));
    }
  } else {
    for (const Outcome& o : out) {
      if (o.ok) units.push_back(total(o));
    }
  }
  if (units.size() < 2) {
    est.std_error = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  const double m = pairwise_sum(units) / static_cast<double>(units.size());
  for (double& v : units) v = (v - m) * (v - m);
  const double var = pairwise_sum(units) / static_cast<double>(units.size() - 1);
  est.std_error = std::sqrt(var / static_cast<double>(units.size()));
  return est;
}

// Drift and volatility evaluation; a constant σ is evaluated once.
class Dynamics {
 public:
  explicit Dynamics(const ProblemSpec& spec) : spec_(spec) {
    constant_sigma_ = true;
    for (const auto& row : spec.sigma) {
      for (const auto& e : row) constant_sigma_ = constant_sigma_ && e.is_constant();
    }
    if (constant_sigma_) {
      const double origin[2] = {0.0, 0.0};
      spec.sigma_at(std::span<const double>(origin, spec.dim),
                    std::span<double>(sigma_, static_cast<std::size_t>(spec.dim * spec.noise_dim)));
    }
  }

  // x ← x + b dt + σ √dt Z + n ν̇ dt; false on a non-finite state.
  bool step(double* x, double dt, double sqdt, const Controller::Action& a, Normals& z) const {
    const int d = spec_.dim;
    const int q = spec_.noise_dim;
    double b[2], local[2 * kMaxNoise], w[kMaxNoise];
    const std::span<const double> xs(x, d);
    spec_.drift_at(xs, std::span<double>(b, d));
    const double* s = sigma_;
    if (!constant_sigma_) {
      spec_.sigma_at(xs, std::span<double>(local, static_cast<std::size_t>(d * q)));
      s = local;
    }
    for (int j = 0; j < q; ++j) w[j] = z.next();
    bool finite = true;
    for (int i = 0; i < d; ++i) {
      double noise = 0.0;
      for (int j = 0; j < q; ++j) noise += s[i * q + j] * w[j];
      x[i] += b[i] * dt + sqdt * noise + a.n[i] * a.rate * dt;
      finite = finite && std::isfinite(x[i]);
    }
    return finite;
  }

 private:
  const ProblemSpec& spec_;
  bool constant_sigma_ = false;
  double sigma_[2 * kMaxNoise] = {};
};

// Step weight ∫_0^dt e^{−κs} ds and factor e^{−κ dt}, memoised on the last κ.
class Discount {
 public:
  explicit Discount(double dt) : dt_(dt) {}
  void set(double kappa) {
    if (kappa == kappa_) return;
    kappa_ = kappa;
    weight_ = step_weight(kappa, dt_);
    factor_ = std::exp(-kappa * dt_);
  }
  double weight() const { return weight_; }
  double factor() const { return factor_; }

 private:
  double dt_;
  double kappa_ = -1.0;
  double weight_ = 0.0;
  double factor_ = 1.0;
};

double norm_sq(const double* x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace

PayoffEstimate simulate_paths(const GameData& data, const StartPoint& start, const Controller& ctrl,
                              const Stopper& stop, const PathConfig& cfg, Exec exec) {
  const ProblemSpec& spec = data.spec();
  check_common(spec, start, ctrl, cfg);
  check_stopper(spec, stop);
  if (stop.is_intensity()) throw ConfigError("the original game needs a stopping rule, not an intensity");
  const int d = spec.dim;
  const double T = spec.horizon;
  const double dt = (T - start.t0) / cfg.n_steps;
  const double sqdt = std::sqrt(dt);
  const Dynamics dyn(spec);
  const double disc = std::exp(-spec.rate * dt);
  const double wgt = step_weight(spec.rate, dt);
  const int nq = cfg.jump_quadrature_points;
  const bool reuse_f = ctrl.data == &data;

  auto path = [&](Normals& z, Outcome& o) {
    double x[2];
    std::copy(start.x0.begin(), start.x0.end(), x);
    const std::span<const double> xs(x, d);
    double R = 1.0;
    bool jumped = false;
    for (int k = 0;; ++k) {
      const double t = k == cfg.n_steps ? T : start.t0 + k * dt;
      if (stop.field && !stop.field->covers(xs)) o.exited = true;
      if (k == cfg.n_steps || stop.stop(t, xs)) {
        o.terminal = R * data.g(t, xs);
        return;
      }
      if (ctrl.mode == Controller::Mode::kImpulse && !jumped && t >= ctrl.impulse_time - 1e-12) {
        jumped = true;
        const double size = ctrl.impulse_size;
        const double piece = size / nq;
        double y[2];
        double cost = 0.0;
        for (int qd = 0; qd < nq; ++qd) {
          const double lambda = (qd + 0.5) * piece;
          for (int i = 0; i < d; ++i) y[i] = x[i] + lambda * ctrl.impulse_dir[i];
          cost += data.f(t, std::span<const double>(y, d)) * piece;
        }
        o.control += R * cost;
        for (int i = 0; i < d; ++i) x[i] += size * ctrl.impulse_dir[i];
      }
      const Controller::Action a = ctrl.act(t, xs);
      if (a.exited) o.exited = true;
      o.running += wgt * R * data.h(t, xs);
      if (a.rate > 0.0) {
        const double f = reuse_f && a.has_f ? a.f : data.f(t, xs);
        o.control += wgt * R * f * a.rate;
      }
      if (!dyn.step(x, dt, sqdt, a, z)) {
        o.ok = false;
        return;
      }
      R *= disc;
    }
  };
  return run_paths(cfg, start, dt, exec, path);
}

PayoffEstimate simulate_penalized(const GameData& data, double radius, const Penalty& pen, double delta,
                                  const StartPoint& start, const Controller& ctrl, const Stopper& intensity,
                                  const PathConfig& cfg, Exec exec) {
  const ProblemSpec& spec = data.spec();
  check_common(spec, start, ctrl, cfg);
  check_stopper(spec, intensity);
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (!(radius > 0.0)) throw ConfigError("radius must be > 0");
  if (!intensity.is_intensity()) throw ConfigError("the penalised game needs a stopping intensity");
  if (intensity.mode == Stopper::Mode::kConstantW && intensity.w > 1.0 / delta * (1.0 + 1e-12)) {
    throw ConfigError("stopping intensity must lie in [0, 1/delta]");
  }
  if (intensity.mode == Stopper::Mode::kWStar && std::abs(intensity.delta - delta) > 1e-15 * delta) {
    throw ConfigError("w* stopper built for a different delta");
  }
  const int d = spec.dim;
  const double T = spec.horizon;
  const double m2 = radius * radius;
  const double dt = (T - start.t0) / cfg.n_steps;
  const double sqdt = std::sqrt(dt);
  const Dynamics dyn(spec);
  const bool reuse_f = ctrl.data == &data;
  const bool closed_form = reuse_f && ctrl.unperturbed_optimal() && ctrl.pen.eps() == pen.eps() &&
                           ctrl.pen.bridge() == pen.bridge();

  auto path = [&](Normals& z, Outcome& o) {
    double x[2];
    std::copy(start.x0.begin(), start.x0.end(), x);
    const std::span<const double> xs(x, d);
    double R = 1.0;
    Discount disc(dt);
    for (int k = 0;; ++k) {
      const double t = k == cfg.n_steps ? T : start.t0 + k * dt;
      if (k == cfg.n_steps || norm_sq(x, d) >= m2) {
        o.terminal += R * data.g(t, xs);
        return;
      }
      const Controller::Action a = ctrl.act(t, xs);
      if (a.exited) o.exited = true;
      double H = 0.0;
      if (a.rate > 0.0) {
        if (closed_form) {
          // p* = −∇u attains the supremum: H = ⟨y*, p*⟩ − ψ(|p*|² − f²)
          H = a.rate * std::sqrt(a.grad_norm_sq) - pen.value(a.grad_norm_sq - a.f * a.f);
        } else {
          const double f = reuse_f && a.has_f ? a.f : data.f(t, xs);
          H = hamiltonian_radial(pen, f, a.rate);
        }
      }
      const double w = intensity.intensity(t, xs);
      disc.set(spec.rate + w);
      const double wgt = disc.weight() * R;
      const double gm = w > 0.0 ? data.g(t, xs) : 0.0;
      o.terminal += wgt * w * gm;
      o.running += wgt * data.h(t, xs);
      o.control += wgt * H;
      if (!dyn.step(x, dt, sqdt, a, z)) {
        o.ok = false;
        return;
      }
      R *= disc.factor();
    }
  };
  return run_paths(cfg, start, dt, exec, path);
}

PayoffEstimate simulate_recursive(const GameData& data, double radius, const Penalty& pen, double delta,
                                  const FeedbackField& field, const StartPoint& start, const Controller& ctrl,
                                  const PathConfig& cfg, Exec exec) {
  const ProblemSpec& spec = data.spec();
  check_common(spec, start, ctrl, cfg);
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (field.dim() != spec.dim) throw ConfigError("field dimension differs from the problem");
  const int d = spec.dim;
  const double T = spec.horizon;
  const double m2 = radius * radius;
  const double dt = (T - start.t0) / cfg.n_steps;
  const double sqdt = std::sqrt(dt);
  const Dynamics dyn(spec);
  const double w = 1.0 / delta;
  const double kappa = spec.rate + w;
  const double wgt = step_weight(kappa, dt);
  const double disc = std::exp(-kappa * dt);
  const bool reuse_f = ctrl.data == &data;
  const bool closed_form = reuse_f && ctrl.unperturbed_optimal() && ctrl.pen.eps() == pen.eps() &&
                           ctrl.pen.bridge() == pen.bridge();

  auto path = [&](Normals& z, Outcome& o) {
    double x[2];
    std::copy(start.x0.begin(), start.x0.end(), x);
    const std::span<const double> xs(x, d);
    double R = 1.0;
    for (int k = 0;; ++k) {
      const double t = k == cfg.n_steps ? T : start.t0 + k * dt;
      if (k == cfg.n_steps || norm_sq(x, d) >= m2) {
        o.terminal += R * data.g(t, xs);
        return;
      }
      if (!field.covers(xs)) o.exited = true;
      const Controller::Action a = ctrl.act(t, xs);
      if (a.exited) o.exited = true;
      double H = 0.0;
      if (a.rate > 0.0) {
        if (closed_form) {
          H = a.rate * std::sqrt(a.grad_norm_sq) - pen.value(a.grad_norm_sq - a.f * a.f);
        } else {
          const double f = reuse_f && a.has_f ? a.f : data.f(t, xs);
          H = hamiltonian_radial(pen, f, a.rate);
        }
      }
      o.terminal += wgt * R * w * std::max(data.g(t, xs), field.value(t, xs));
      o.running += wgt * R * data.h(t, xs);
      o.control += wgt * R * H;
      if (!dyn.step(x, dt, sqdt, a, z)) {
        o.ok = false;
        return;
      }
      R *= disc;
    }
  };
  return run_paths(cfg, start, dt, exec, path);
}

bool SaddleReport::all_pass() const {
  return std::all_of(probes.begin(), probes.end(), [](const ProbeResult& p) { return p.pass; });
}

std::vector<Perturbation> default_perturbations(const FeedbackField& field, const GameData& data,
                                                const Penalty& pen, double band, const StartPoint& start,
                                                double horizon, double push) {
  const Controller opt = Controller::optimal(field, data, pen);
  const double span = horizon - start.t0;
  const std::size_t d = start.x0.size();
  std::vector<double> e1(d, 0.0);
  e1[0] = push;
  std::vector<double> me1(d, 0.0);
  me1[0] = -push;

  std::vector<Perturbation> out;
  auto stopper = [&](std::string name, Stopper s) {
    Perturbation p;
    p.name = std::move(name);
    p.side = Perturbation::Side::kStopper;
    p.stopper = s;
    out.push_back(std::move(p));
  };
  auto controller = [&](std::string name, Controller c) {
    Perturbation p;
    p.name = std::move(name);
    p.side = Perturbation::Side::kController;
    p.controller = std::move(c);
    out.push_back(std::move(p));
  };
  stopper("stop_immediately", Stopper::fixed(start.t0));
  stopper("never_stop", Stopper::fixed(horizon));
  stopper("stop_at_half", Stopper::fixed(start.t0 + 0.5 * span));
  stopper("stop_at_quarter", Stopper::fixed(start.t0 + 0.25 * span));
  stopper("band_plus_0.05", Stopper::tau_star(field, data, band + 0.05));
  stopper("band_plus_0.2", Stopper::tau_star(field, data, band + 0.2));
  controller("idle", Controller::idle());
  controller("rate_x0.5", Controller::scaled(opt, 0.5));
  controller("rate_x2", Controller::scaled(opt, 2.0));
  controller("reversed", Controller::rotated(opt, std::acos(-1.0)));
  controller("push_plus", Controller::constant_push(e1));
  controller("push_minus", Controller::constant_push(me1));
  return out;
}

SaddleReport saddle_probe(const GameData& data, const FeedbackField& field, const Penalty& pen, double band,
                          const StartPoint& start, const std::vector<Perturbation>& perturbations,
                          const PathConfig& cfg, double allowance, Exec exec) {
  SaddleReport rep;
  rep.reference = field.value(start.t0, start.x0);
  const Controller opt = Controller::optimal(field, data, pen);
  const Stopper tau = Stopper::tau_star(field, data, band);
  rep.baseline = simulate_paths(data, start, opt, tau, cfg, exec);
  for (const Perturbation& p : perturbations) {
    ProbeResult r;
    r.name = p.name;
    r.side = p.side;
    r.reference = rep.reference;
    if (p.side == Perturbation::Side::kStopper) {
      r.estimate = simulate_paths(data, start, opt, p.stopper, cfg, exec);
      r.margin = 3.0 * r.estimate.std_error + allowance;
      r.pass = r.estimate.mean <= rep.reference + r.margin;
    } else {
      r.estimate = simulate_paths(data, start, p.controller, tau, cfg, exec);
      r.margin = 3.0 * r.estimate.std_error + allowance;
      r.pass = r.estimate.mean >= rep.reference - r.margin;
    }
    rep.probes.push_back(std::move(r));
  }
  return rep;
}

}  // namespace csgame
