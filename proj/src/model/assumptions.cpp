#include "csgame/model/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "csgame/error.hpp"

namespace csgame {

namespace {

struct Sample {
  double t1 = 0.0;
  double t2 = 0.0;
  std::vector<double> x;
};

struct SampleEval {
  bool ok = true;
  std::string error;
  double norm_x = 0.0;
  double d1_ratio = 0.0;
  double min_eig = 0.0;
  double margin = 0.0;
  double theta = 0.0;
  double time_rate = -std::numeric_limits<double>::infinity();
  double f_increase = -std::numeric_limits<double>::infinity();
  double k1_ratio = 0.0;
  double f_growth = 0.0;
  double f = 0.0, g = 0.0, h = 0.0;
};

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::vector<Sample> build_samples(const ProblemSpec& spec, const SamplePlan& plan) {
  const int d = spec.dim;
  const double T = spec.horizon;
  std::vector<Sample> out;
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int nt = std::max(plan.time_points, 2);
  std::vector<double> times(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) times[k] = T * k / (nt - 1);

  for (double R : plan.radii) {
    int n = std::max(plan.grid_points, 3);
    if (n % 2 == 0) ++n;
    // tensor grid over [-R,R]^d restricted to the closed ball
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
      std::vector<double> x(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) x[i] = -R + 2.0 * R * idx[i] / (n - 1);
      if (norm(x) <= R * (1.0 + 1e-12)) {
        for (int k = 0; k < nt; ++k) {
          const double t2 = k + 1 < nt ? times[k + 1] : times[k];
          out.push_back({times[k], t2, x});
        }
      }
      int j = 0;
      while (j < d && ++idx[j] == n) idx[j++] = 0;
      if (j == d) break;
    }
    for (int s = 0; s < plan.count; ++s) {
      std::vector<double> x(static_cast<std::size_t>(d));
      do {
        for (int i = 0; i < d; ++i) x[i] = R * (2.0 * unit(rng) - 1.0);
      } while (norm(x) > R);
      const double t1 = T * unit(rng);
      const double t2 = t1 + (T - t1) * unit(rng);
      out.push_back({t1, t2, std::move(x)});
    }
  }
  return out;
}

SampleEval evaluate(const ProblemSpec& spec, const Sample& s) {
  SampleEval r;
  const int d = spec.dim;
  try {
    r.norm_x = norm(s.x);
    r.f = spec.f.eval(s.t1, s.x);
    r.g = spec.g.eval(s.t1, s.x);
    r.h = spec.h.eval(s.t1, s.x);

    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> sig(static_cast<std::size_t>(d * spec.noise_dim));
    std::vector<double> a(static_cast<std::size_t>(d * d));
    spec.drift_at(s.x, b);
    spec.sigma_at(s.x, sig);
    spec.diffusion_at(s.x, a);
    r.d1_ratio = (norm(b) + norm(sig)) / (1.0 + r.norm_x);

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> am(
        a.data(), d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(am, Eigen::EigenvaluesOnly);
    r.min_eig = eig.eigenvalues().minCoeff();

    const Derivatives dg = eval_with_derivatives(spec.g, s.t1, s.x, 1, spec.fd_step);
    r.margin = r.f - norm(dg.gradient);
    r.theta = spec.theta(s.t1, s.x);

    // f^2 must be twice differentiable in x and once in t
    const Expression& f = spec.f;
    const Derivatives df = eval_with_derivatives(f, s.t1, s.x, 2, spec.fd_step);
    (void)time_derivative(f, s.t1, s.x, spec.horizon, spec.fd_step);
    (void)eval_with_derivatives(spec.g, s.t1, s.x, 2, spec.fd_step);
    (void)eval_with_derivatives(spec.h, s.t1, s.x, 1, spec.fd_step);
    for (double v : df.hessian) {
      if (!std::isfinite(v)) throw ExpressionError(ExpressionError::Kind::kDomain, 0, "f'' not finite");
    }

    r.k1_ratio = (r.g + r.h) / (1.0 + r.norm_x * r.norm_x);
    r.f_growth = r.f / (1.0 + r.norm_x * r.norm_x);

    if (s.t2 > s.t1) {
      const double dt = s.t2 - s.t1;
      const double g2 = spec.g.eval(s.t2, s.x);
      const double h2 = spec.h.eval(s.t2, s.x);
      const double f2 = spec.f.eval(s.t2, s.x);
      r.time_rate = std::max((g2 - r.g) / dt, (h2 - r.h) / dt);
      r.f_increase = f2 - r.f;
    }
  } catch (const ExpressionError& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

}  // namespace

AssumptionReport validate_assumptions(const ProblemSpec& spec, const SamplePlan& plan, Exec exec,
                                      double tol) {
  spec.check_shape();
  const std::vector<Sample> samples = build_samples(spec, plan);
  std::vector<SampleEval> evals(samples.size());

  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) evals[i] = evaluate(spec, samples[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) evals[i] = evaluate(spec, samples[i]);
  }

  AssumptionReport rep;
  rep.samples = samples.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  rep.grad_g_le_f_margin = kInf;
  rep.Theta_min = kInf;
  rep.min_a_eigenvalue = kInf;
  double k0 = 0.0;
  for (double R : plan.radii) rep.ellipticity_theta[R] = kInf;

  auto record = [&](const char* check, const Sample& s, double value) {
    auto& c = rep.violation_counts[check];
    if (c < AssumptionReport::kMaxStored) rep.violations.push_back({check, s.t1, s.x, value});
    ++c;
  };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const SampleEval& e = evals[i];
    if (!e.ok) {
      record("evaluation", s, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    rep.linear_growth_D1 = std::max(rep.linear_growth_D1, e.d1_ratio);
    for (auto& [R, theta] : rep.ellipticity_theta) {
      if (e.norm_x <= R * (1.0 + 1e-12)) theta = std::min(theta, e.min_eig);
    }
    rep.min_a_eigenvalue = std::min(rep.min_a_eigenvalue, e.min_eig);
    rep.grad_g_le_f_margin = std::min(rep.grad_g_le_f_margin, e.margin);
    rep.Theta_min = std::min(rep.Theta_min, e.theta);
    k0 = std::max(k0, e.time_rate);
    rep.K1 = std::max(rep.K1, e.k1_ratio);
    rep.f_growth_c = std::max(rep.f_growth_c, e.f_growth);

    if (e.f < -tol) record("f_nonnegative", s, e.f);
    if (e.g < -tol) record("g_nonnegative", s, e.g);
    if (e.h < -tol) record("h_nonnegative", s, e.h);
    if (e.min_eig < -tol) record("a_positive_semidefinite", s, e.min_eig);
    if (e.margin < -tol) record("grad_g_le_f", s, e.margin);
    if (e.f_increase > tol) {
      rep.f_time_monotone = false;
      record("f_time_nonincreasing", s, e.f_increase);
    }
  }
  for (const auto& [R, theta] : rep.ellipticity_theta) {
    if (!(theta > tol)) {
      auto& c = rep.violation_counts["local_ellipticity"];
      if (c < AssumptionReport::kMaxStored) {
        rep.violations.push_back({"local_ellipticity", 0.0, {R}, theta});
      }
      ++c;
    }
  }
  if (!std::isfinite(rep.Theta_min)) rep.Theta_min = 0.0;
  if (!std::isfinite(rep.grad_g_le_f_margin)) rep.grad_g_le_f_margin = 0.0;
  rep.K0 = k0;
  rep.K2 = std::max(0.0, -rep.Theta_min);
  return rep;
}

}  // namespace csgame
