#include <cstdio>
#include <exception>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "csgame/app/commands.hpp"

namespace {

void add_common(CLI::App* cmd, csgame::CommandOptions& o) {
  cmd->add_option("--out", o.out, "Root directory for run directories")->capture_default_str();
  cmd->add_flag("--quiet", o.quiet, "Only print errors");
  cmd->add_flag_function(
      "--serial", [&o](std::int64_t) { o.exec = csgame::Exec::kSerial; }, "Use the serial reference loops");
}

void add_solver(CLI::App* cmd, csgame::CommandOptions& o) {
  cmd->add_option("--schedule", o.schedule, "Penalty schedule eps0,delta0,K");
  cmd->add_option("--grid", o.grid, "Grid m,nx,nt");
  cmd->add_option("--tol", o.tol, "Solver tolerance");
  cmd->add_option("--method", o.method, "Level solver: newton or picard");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalised controller/stopper game solver"};
  app.require_subcommand(1);
  csgame::CommandOptions o;

  auto* validate = app.add_subcommand("validate", "Check the standing assumptions of a problem");
  validate->add_option("--config", o.config, "Problem file")->required();
  add_common(validate, o);

  auto* solve = app.add_subcommand("solve", "Run the penalty continuation and write field artifacts");
  solve->add_option("--config", o.config, "Problem file")->required();
  add_solver(solve, o);
  add_common(solve, o);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates and saddle probes for a solved field");
  simulate->add_option("--config", o.config, "Problem file")->required();
  simulate->add_option("--field", o.field, "limit_field.bin from a solve run")->required();
  simulate->add_option("--paths", o.paths, "Paths per estimate");
  simulate->add_option("--steps", o.steps, "Time steps per path");
  simulate->add_option("--seed", o.seed, "Base seed");
  simulate->add_option("--start", o.start, "Start points, e.g. \"-1 | 0 | 1\" or \"0,0 | 1,0\"");
  simulate->add_option("--eps", o.eps, "Penalty eps of the field (default: from its manifest)");
  simulate->add_option("--delta", o.delta, "Penalty delta of the field (default: from its manifest)");
  simulate->add_option("--radius", o.radius, "Truncation radius m (default: from its manifest)");
  add_common(simulate, o);

  auto* verify = app.add_subcommand("verify", "Run the invariant suites");
  verify->add_option("--config", o.configs, "Problem file (repeatable)")->required();
  verify->add_option("--cases", o.cases, "Randomized cases per kernel check");
  verify->add_option("--seed", o.seed, "Seed of the kernel suite");
  verify->add_option("--schedule", o.schedule, "Penalty schedule eps0,delta0,K");
  verify->add_flag("--inject-fault-psi-bridge", o.inject_psi_fault, "Use a broken penalty bridge (test hook)")
      ->group("");
  add_common(verify, o);

  auto* sweep = app.add_subcommand("sweep", "Refinement sweep of the continuation limit");
  sweep->add_option("--config", o.config, "Problem file")->required();
  sweep->add_option("--levels", o.levels, "Number of resolutions (finest is the configured grid)");
  add_solver(sweep, o);
  add_common(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? csgame::kExitOk : csgame::kExitIo;
  }

  try {
    if (*validate) return csgame::cmd_validate(o);
    if (*solve) return csgame::cmd_solve(o);
    if (*simulate) return csgame::cmd_simulate(o);
    if (*verify) return csgame::cmd_verify(o);
    if (*sweep) return csgame::cmd_sweep(o);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return csgame::exit_code_for(e);
  }
  return csgame::kExitFailure;
}
