#include <doctest.h>

#include <cmath>

#include "csgame/sim/simulate.hpp"
#include "csgame/sim/strategy.hpp"
#include "helpers.hpp"

using namespace csgame;

namespace {

PathConfig small_paths(std::uint64_t seed = 3) {
  PathConfig pc;
  pc.n_paths = 2000;
  pc.n_steps = 200;
  pc.seed = seed;
  return pc;
}

bool same(const PayoffEstimate& a, const PayoffEstimate& b) {
  return a.mean == b.mean && a.std_error == b.std_error && a.n_paths == b.n_paths && a.exited == b.exited;
}

}  // namespace

TEST_CASE("zero game pays zero") {
  const ConfigFile c = testing::zero();
  const SpecData data(c.spec);
  const FeedbackField field(GridField(Grid(1, 4.0, 81, 10, 1.0)));
  const Penalty pen(0.1);
  const StartPoint s{0.0, {0.5}};
  const PayoffEstimate e = simulate_paths(data, s, Controller::optimal(field, data, pen),
                                          Stopper::tau_star(field, data, 0.01), small_paths());
  CHECK(e.mean == 0.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("constant game pays one") {
  const ConfigFile c = testing::const1();
  const SpecData data(c.spec);
  const FeedbackField field(GridField(Grid(1, 4.0, 81, 10, 1.0), 1.0));
  const Penalty pen(0.1);
  const StartPoint s{0.0, {0.3}};
  for (const Stopper& stop : {Stopper::fixed(1.0), Stopper::tau_star(field, data, 0.01)}) {
    const PayoffEstimate e = simulate_paths(data, s, Controller::idle(), stop, small_paths());
    CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.std_error <= 1e-14);
  }
  const TruncatedData data_m(c.spec, 4.0);
  const PayoffEstimate r =
      simulate_recursive(data_m, pen, 0.1, field, s, Controller::optimal(field, data_m, pen), small_paths());
  CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("control costs") {
  const ConfigFile c = testing::ou_config("0", "0", "2", 0.0);
  const SpecData data(c.spec);
  const StartPoint s{0.0, {0.0}};
  const PayoffEstimate jump =
      simulate_paths(data, s, Controller::impulse(0.5, 0.3, {1.0}), Stopper::fixed(1.0), small_paths());
  CHECK(jump.mean == doctest::Approx(0.6).epsilon(1e-12));

  const ConfigFile one = testing::const1();
  const SpecData data1(one.spec);
  const PayoffEstimate push =
      simulate_paths(data1, s, Controller::constant_push({0.5}), Stopper::fixed(1.0), small_paths());
  CHECK(push.mean == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("penalised game without stopping intensity matches the plain game") {
  const ConfigFile c = testing::bench_ou();
  const TruncatedData data_m(c.spec, 4.0);
  const StartPoint s{0.0, {0.2}};
  const PayoffEstimate pen_game = simulate_penalized(data_m, Penalty(0.1), 0.1, s, Controller::idle(),
                                                     Stopper::constant_w(0.0), small_paths());
  const PayoffEstimate plain = simulate_paths(data_m, s, Controller::idle(), Stopper::fixed(1.0), small_paths());
  CHECK(pen_game.exited == 0);
  CHECK(pen_game.mean == doctest::Approx(plain.mean).epsilon(1e-12));
}

TEST_CASE("serial and parallel estimates are bit-identical") {
  const ConfigFile c = testing::bench_ou();
  const TruncatedData data_m(c.spec, 4.0);
  GridField u(Grid(1, 4.0, 81, 20, 1.0));
  for (int n = 0; n <= 20; ++n) {
    for (std::size_t k = 0; k < 81; ++k) {
      const double x = u.grid().coord(static_cast<int>(k));
      u.at(n, k) = 1.2 * std::exp(-x * x);
    }
  }
  const FeedbackField field(u);
  const Penalty pen(0.1);
  const Controller ctrl = Controller::optimal(field, data_m, pen);
  const StartPoint s{0.0, {0.4}};
  const PathConfig pc = small_paths(11);
  CHECK(same(simulate_paths(data_m, s, ctrl, Stopper::tau_star(field, data_m, 0.01), pc, Exec::kSerial),
             simulate_paths(data_m, s, ctrl, Stopper::tau_star(field, data_m, 0.01), pc, Exec::kParallel)));
  CHECK(same(simulate_penalized(data_m, pen, 0.1, s, ctrl, Stopper::w_star(field, data_m, 0.1), pc, Exec::kSerial),
             simulate_penalized(data_m, pen, 0.1, s, ctrl, Stopper::w_star(field, data_m, 0.1), pc, Exec::kParallel)));
  CHECK(same(simulate_recursive(data_m, pen, 0.1, field, s, ctrl, pc, Exec::kSerial),
             simulate_recursive(data_m, pen, 0.1, field, s, ctrl, pc, Exec::kParallel)));

}
