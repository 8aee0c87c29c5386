#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "csgame/parallel.hpp"

namespace csgame {

/// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitNoConvergence = 2, kExitIo = 3 };

/// Maps an exception to an exit code: solver and continuation errors give 2;
/// configuration, expression and I/O errors give 3; data and simulation
/// errors (and anything else) give 1.
int exit_code_for(const std::exception& e) noexcept;

/// Command-line values. Unset optionals fall back to the config file's
/// [solve] / [simulate] / [sweep] sections, then to built-in defaults.
struct CommandOptions {
  std::filesystem::path config;
  std::vector<std::filesystem::path> configs;  // verify: every problem to check
  std::filesystem::path out = "runs";
  std::optional<std::string> schedule;  // "eps0,delta0,K"
  std::optional<std::string> grid;      // "m,nx,nt"
  std::optional<double> tol;
  std::optional<int> paths;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;  // newton | picard
  std::optional<std::string> start;   // "x1[,x2] | x1[,x2] | ..."
  std::optional<double> eps;          // simulate: override the field's manifest
  std::optional<double> delta;
  std::optional<double> radius;
  std::optional<int> cases;   // verify: kernel suite cases per check
  std::optional<int> levels;  // sweep: number of resolutions
  std::filesystem::path field;
  bool inject_psi_fault = false;
  Exec exec = Exec::kParallel;
  bool quiet = false;
};

/// Each command creates one run directory under `out`, writes its
/// artifacts and a manifest, prints a summary and returns an exit code.
/// Errors raised after the run directory exists are recorded in the
/// manifest; earlier ones (unreadable config) propagate.
int cmd_validate(const CommandOptions& opts);
int cmd_solve(const CommandOptions& opts);
int cmd_simulate(const CommandOptions& opts);
int cmd_verify(const CommandOptions& opts);
int cmd_sweep(const CommandOptions& opts);

}  // namespace csgame
