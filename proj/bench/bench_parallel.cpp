// Serial reference loops against their OpenMP counterparts. The argument
// selects the execution mode: 0 serial, 1 parallel.
#include <cmath>
#include <string>

#include <benchmark/benchmark.h>

#include "csgame/model/assumptions.hpp"
#include "csgame/model/problem.hpp"
#include "csgame/oracles/oracles.hpp"
#include "csgame/sim/simulate.hpp"
#include "csgame/sim/strategy.hpp"
#include "csgame/verify/kernel_suite.hpp"

using namespace csgame;

namespace {

const ConfigFile& bench_config() {
  static const ConfigFile cfg = load_config(std::string(CSGAME_CONFIG_DIR) + "/bench_ou.ini");
  return cfg;
}

Exec mode(const benchmark::State& state) { return state.range(0) == 0 ? Exec::kSerial : Exec::kParallel; }

void BM_Assumptions(benchmark::State& state) {
  const ConfigFile& cfg = bench_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate_assumptions(cfg.spec, cfg.spec.sample_plan, mode(state)));
  }
}

void BM_LatticeGame(benchmark::State& state) {
  const ConfigFile& cfg = bench_config();
  const SpecData data(cfg.spec);
  const LatticeGame game{Grid(1, 4.0, 401, 5000, 1.0), &data};
  for (auto _ : state) benchmark::DoNotOptimize(solve_lattice_game(game, mode(state)));
}

void BM_RecursivePaths(benchmark::State& state) {
  const ConfigFile& cfg = bench_config();
  const TruncatedData data(cfg.spec, 4.0);
  GridField u(Grid(1, 4.0, 201, 200, 1.0));
  for (int n = 0; n <= 200; ++n) {
    for (std::size_t k = 0; k < u.grid().nodes(); ++k) {
      const double x = u.grid().coord(static_cast<int>(k));
      u.at(n, k) = 1.1 * std::exp(-x * x);
    }
  }
  const FeedbackField field(u);
  const Penalty pen(0.05);
  const Controller ctrl = Controller::optimal(field, data, pen);
  PathConfig pc;
  pc.n_paths = 4000;
  pc.n_steps = 200;
  const StartPoint s{0.0, {0.5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_recursive(data, pen, 0.05, field, s, ctrl, pc, mode(state)));
  }
}

void BM_KernelSuite(benchmark::State& state) {
  const ConfigFile& cfg = bench_config();
  KernelSuiteOptions o;
  o.cases = 10000;
  o.specs = {&cfg.spec};
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_invariant_suite(o));
}

}  // namespace

BENCHMARK(BM_Assumptions)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatticeGame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RecursivePaths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelSuite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
