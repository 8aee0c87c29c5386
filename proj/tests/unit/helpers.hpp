#pragma once

#include <string>

#include "csgame/model/problem.hpp"

namespace csgame::testing {

/// OU dynamics in d = 1 with the given data.
inline ConfigFile ou_config(const std::string& g, const std::string& h, const std::string& f, double rate,
                            const std::string& name = "test") {
  return parse_config("name = " + name + "\ndim = 1\nhorizon = 1\nrate = " + std::to_string(rate) +
                      "\ndrift[1] = -x1\nsigma[1][1] = 1\ng = " + g + "\nh = " + h + "\nf = " + f + "\n");
}

inline ConfigFile const1() { return ou_config("1", "0", "1", 0.0, "const1"); }
inline ConfigFile zero() { return ou_config("0", "0", "1", 0.0, "zero"); }
inline ConfigFile bench_ou() {
  return ou_config("exp(-x1^2)", "0", "sqrt(0.01 + 4*x1^2*exp(-2*x1^2))", 0.05, "bench-ou");
}

}  // namespace csgame::testing
