#include "csgame/model/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "csgame/error.hpp"

namespace csgame {

void ProblemSpec::drift_at(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < dim; ++i) out[i] = drift[i].eval(0.0, x);
}

void ProblemSpec::sigma_at(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < noise_dim; ++j) out[i * noise_dim + j] = sigma[i][j].eval(0.0, x);
  }
}

void ProblemSpec::diffusion_at(std::span<const double> x, std::span<double> out) const {
  std::vector<double> s(static_cast<std::size_t>(dim * noise_dim));
  sigma_at(x, s);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (int k = 0; k < noise_dim; ++k) acc += s[i * noise_dim + k] * s[j * noise_dim + k];
      out[i * dim + j] = acc;
    }
  }
}

double ProblemSpec::generator(const Expression& phi, double t, std::span<const double> x) const {
  const Derivatives dv = eval_with_derivatives(phi, t, x, 2, fd_step);
  std::vector<double> a(static_cast<std::size_t>(dim * dim));
  std::vector<double> b(static_cast<std::size_t>(dim));
  diffusion_at(x, a);
  drift_at(x, b);
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    acc += b[i] * dv.gradient[i];
    for (int j = 0; j < dim; ++j) acc += 0.5 * a[i * dim + j] * dv.hessian[i * dim + j];
  }
  return acc;
}

double ProblemSpec::theta(double t, std::span<const double> x) const {
  return h.eval(t, x) + time_derivative(g, t, x, horizon, fd_step) + generator(g, t, x) -
         rate * g.eval(t, x);
}

void ProblemSpec::check_shape() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (noise_dim < 1) throw ConfigError("sigma must have at least one column");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(rate >= 0.0)) throw ConfigError("rate must be >= 0");
  if (static_cast<int>(drift.size()) != dim) throw ConfigError("drift must have dim entries");
  if (static_cast<int>(sigma.size()) != dim) throw ConfigError("sigma must have dim rows");
  for (const auto& row : sigma) {
    if (static_cast<int>(row.size()) != noise_dim) throw ConfigError("sigma rows differ in length");
  }
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("not a number: '{}'", item));
    }
    if (used != item.size()) throw ConfigError(fmt::format("not a number: '{}'", item));
    out.push_back(v);
  }
  return out;
}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_section_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"sample_plan", {"radii", "count", "grid_points", "time_points", "seed"}},
      {"solve",
       {"schedule", "grid", "tol", "max_iter", "method", "tol_region", "dump_slices",
        "refine_mid_schedule", "bound_radius", "oracles"}},
      {"simulate",
       {"start", "start_t", "paths", "steps", "seed", "antithetic", "controller", "stopper",
        "stop_band", "probe_paths"}},
      {"sweep", {"levels"}},
  };
  return keys;
}

double to_double(const std::string& key, const std::string& v) {
  const auto list = parse_double_list(v);
  if (list.size() != 1) throw ConfigError(fmt::format("key '{}' expects one number", key));
  return list[0];
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError(fmt::format("key '{}' expects an integer", key));
  return static_cast<int>(d);
}

Expression to_expr(const std::string& key, const std::string& v, int dim) {
  try {
    return parse_expression(v, dim);
  } catch (const ExpressionError& e) {
    throw ConfigError(fmt::format("key '{}': {}", key, e.what()));
  }
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config parse error: {}", e.what()));
  }

  ConfigFile cfg;
  std::map<std::string, std::string> top;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      top[key] = node.data();
      continue;
    }
    const auto& allowed = allowed_section_keys();
    auto it = allowed.find(key);
    if (it == allowed.end()) throw ConfigError(fmt::format("unknown section [{}]", key));
    auto& section = cfg.sections[key];
    for (const auto& [k, v] : node) {
      if (!it->second.count(k)) throw ConfigError(fmt::format("unknown key '{}' in [{}]", k, key));
      section[k] = v.data();
    }
  }

  ProblemSpec& s = cfg.spec;
  if (!top.count("dim")) throw ConfigError("missing key 'dim'");
  s.dim = to_int("dim", top["dim"]);
  if (s.dim < 1) throw ConfigError("dim must be >= 1");

  static const std::regex kDrift(R"(drift\[(\d+)\])");
  static const std::regex kSigma(R"(sigma\[(\d+)\]\[(\d+)\])");
  std::map<int, std::string> drift_src;
  std::map<std::pair<int, int>, std::string> sigma_src;
  int noise_dim = 1;
  for (const auto& [key, value] : top) {
    std::smatch m;
    if (key == "name") {
      s.name = value;
    } else if (key == "dim") {
    } else if (key == "horizon") {
      s.horizon = to_double(key, value);
    } else if (key == "rate") {
      s.rate = to_double(key, value);
    } else if (key == "fd_step") {
      s.fd_step = to_double(key, value);
    } else if (key == "f" || key == "g" || key == "h") {
    } else if (std::regex_match(key, m, kDrift)) {
      const int i = std::stoi(m[1]);
      if (i < 1 || i > s.dim) throw ConfigError(fmt::format("'{}' out of range", key));
      drift_src[i] = value;
    } else if (std::regex_match(key, m, kSigma)) {
      const int i = std::stoi(m[1]);
      const int j = std::stoi(m[2]);
      if (i < 1 || i > s.dim || j < 1) throw ConfigError(fmt::format("'{}' out of range", key));
      sigma_src[{i, j}] = value;
      noise_dim = std::max(noise_dim, j);
    } else {
      throw ConfigError(fmt::format("unknown key '{}'", key));
    }
  }

  for (const char* k : {"f", "g", "h"}) {
    if (!top.count(k)) throw ConfigError(fmt::format("missing key '{}'", k));
  }
  s.f = to_expr("f", top["f"], s.dim);
  s.g = to_expr("g", top["g"], s.dim);
  s.h = to_expr("h", top["h"], s.dim);

  s.drift.clear();
  for (int i = 1; i <= s.dim; ++i) {
    auto it = drift_src.find(i);
    if (it == drift_src.end()) throw ConfigError(fmt::format("missing key 'drift[{}]'", i));
    s.drift.push_back(to_expr(fmt::format("drift[{}]", i), it->second, s.dim));
  }
  s.noise_dim = noise_dim;
  s.sigma.assign(static_cast<std::size_t>(s.dim), {});
  for (int i = 1; i <= s.dim; ++i) {
    for (int j = 1; j <= noise_dim; ++j) {
      auto it = sigma_src.find({i, j});
      s.sigma[i - 1].push_back(it == sigma_src.end()
                                   ? Expression::constant(0.0, s.dim)
                                   : to_expr(fmt::format("sigma[{}][{}]", i, j), it->second, s.dim));
    }
  }
  for (const auto& e : s.drift) {
    if (e.depends_on_time()) throw ConfigError("drift must not depend on t");
  }
  for (const auto& row : s.sigma) {
    for (const auto& e : row) {
      if (e.depends_on_time()) throw ConfigError("sigma must not depend on t");
    }
  }

  if (auto it = cfg.sections.find("sample_plan"); it != cfg.sections.end()) {
    for (const auto& [k, v] : it->second) {
      if (k == "radii") {
        s.sample_plan.radii = parse_double_list(v);
      } else if (k == "count") {
        s.sample_plan.count = to_int(k, v);
      } else if (k == "grid_points") {
        s.sample_plan.grid_points = to_int(k, v);
      } else if (k == "time_points") {
        s.sample_plan.time_points = to_int(k, v);
      } else if (k == "seed") {
        s.sample_plan.seed = static_cast<std::uint64_t>(to_int(k, v));
      }
    }
  }
  s.check_shape();

  std::string canon;
  for (const auto& [k, v] : top) canon += fmt::format("{}={}\n", k, v);
  for (const auto& [sec, kv] : cfg.sections) {
    canon += fmt::format("[{}]\n", sec);
    for (const auto& [k, v] : kv) canon += fmt::format("{}={}\n", k, v);
  }
  cfg.canonical_text = std::move(canon);
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in || std::filesystem::is_directory(path)) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace csgame
