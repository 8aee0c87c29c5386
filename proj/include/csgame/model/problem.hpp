#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "csgame/model/expression.hpp"

namespace csgame {

/// Where and how densely validate_assumptions probes the data.
struct SamplePlan {
  std::vector<double> radii{1.0, 2.0, 4.0};
  int count = 2000;     // uniform random points per radius
  int grid_points = 41;  // stratified points per axis (forced odd so the origin is hit)
  int time_points = 11;
  std::uint64_t seed = 20240101;
};

/// Data of the controller/stopper game: dX = b(X)dt + σ(X)dW + n dν on
/// [0,T] with stopping payoff g, running payoff h, unit control cost f and
/// discount rate r.
struct ProblemSpec {
  std::string name;
  int dim = 1;
  int noise_dim = 1;
  double horizon = 1.0;
  double rate = 0.0;
  std::vector<Expression> drift;               // d entries, functions of x
  std::vector<std::vector<Expression>> sigma;  // d × d'
  Expression f{1};
  Expression g{1};
  Expression h{1};
  double fd_step = 1e-5;
  SamplePlan sample_plan;

  void drift_at(std::span<const double> x, std::span<double> out) const;
  void sigma_at(std::span<const double> x, std::span<double> out) const;  // row-major d×d'
  /// a = σσᵀ, row-major d×d.
  void diffusion_at(std::span<const double> x, std::span<double> out) const;

  /// (𝓛φ)(t,x) = ½ tr(a D²φ) + ⟨b, ∇φ⟩ via finite differences of φ.
  double generator(const Expression& phi, double t, std::span<const double> x) const;

  /// Θ = h + ∂_t g + 𝓛g − r g.
  double theta(double t, std::span<const double> x) const;

  /// Structural sanity: sizes agree, horizon > 0, rate ≥ 0.
  void check_shape() const;
};

/// Raw key/value sections of a problem file, kept so that downstream
/// commands can read their own blocks ([solve], [simulate]).
struct ConfigFile {
  ProblemSpec spec;
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string canonical_text;  // normalised content, used for hashing
};

/// Loads a problem file. Format (INI, `;` comments):
///
///     name = bench-ou
///     dim = 1
///     horizon = 1
///     rate = 0.05
///     drift[1] = -x1
///     sigma[1][1] = 1
///     f = 1
///     g = exp(-x1^2)
///     h = 0
///     fd_step = 1e-5          ; optional
///     [sample_plan]
///     radii = 1,2,4
///     count = 2000
///     grid_points = 41
///     time_points = 11
///     seed = 7
///     [solve]     ... (keys documented in the CLI)
///     [simulate]  ...
///
/// Unknown keys raise ConfigError. Missing sigma entries default to 0.
ConfigFile load_config(const std::filesystem::path& path);
ConfigFile parse_config(const std::string& text);

/// Parses a comma-separated list of doubles.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace csgame
