#include <doctest.h>

#include <sstream>

#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"
#include "flagsim/error.hpp"

using namespace flagsim;

namespace {

RobotConfig coarse() {
  auto c = preset("fitted_sec2");
  c.nodes_per_tail = 5;
  c.dt = 0.02 * c.time_scale();
  c.interface_hold = 1.0;
  return c;
}

}  // namespace

TEST_CASE("actuation schedule lookup and construction") {
  ActuationSchedule s({0.0, 1.0, 2.5}, {15.0, -15.0, 15.0}, 4.0);
  CHECK(s.omega_at(0.5) == 15.0);
  CHECK(s.omega_at(1.0) == -15.0);
  CHECK(s.omega_at(3.9) == 15.0);
  CHECK(s.segment_end(1) == 2.5);
  CHECK(s.negated().omega_at(0.5) == -15.0);

  ActuationSchedule a;
  a.append(5.0, 1.0);
  a.append(5.0, 1.0);
  a.append(-5.0, 0.5);
  CHECK(a.size() == 2);
  CHECK(a.duration() == doctest::Approx(2.5));
  CHECK_THROWS_AS(ActuationSchedule({0.0, 2.0, 1.0}, {1.0, 2.0, 3.0}, 4.0), ConfigError);
}

TEST_CASE("schedule CSV round trip") {
  ActuationSchedule s({0.0, 1.25}, {15.0, -15.0}, 3.0);
  std::stringstream io;
  write_schedule_csv(io, s);
  const auto back = read_schedule_csv(io);
  CHECK(back.duration() == 3.0);
  CHECK(back.switch_times() == s.switch_times());
  CHECK(back.omegas() == s.omegas());
}

TEST_CASE("short simulation stays at the surface and spins the head and tails oppositely") {
  const auto c = coarse();
  SimulationOptions o;
  o.output_stride = 0.1;
  const auto traj = simulate(c, ActuationSchedule::constant(15.0, 6.0), o);
  REQUIRE(traj.size() > 50);
  CHECK_FALSE(traj.vertical_drift_exceeded);
  const double wh = traj.omega_h.back();
  const double wt = traj.omega_t.back();
  CHECK(wh * wt < 0.0);
  CHECK(std::abs(wh) + std::abs(wt) == doctest::Approx(15.0).epsilon(0.05));
  for (const auto& a : traj.head_axis) CHECK(a.norm() == doctest::Approx(1.0));
}

TEST_CASE("simulation is deterministic and trajectory CSV round-trips") {
  const auto c = coarse();
  SimulationOptions o;
  o.output_stride = 0.2;
  o.snapshot_stride = 5;
  const auto sched = ActuationSchedule({0.0, 1.0}, {15.0, -15.0}, 2.0);
  const auto a = simulate(c, sched, o);
  const auto b = simulate(c, sched, o);
  std::stringstream sa, sb;
  write_trajectory_csv(sa, a);
  write_trajectory_csv(sb, b);
  CHECK(sa.str() == sb.str());
  const auto back = read_trajectory_csv(sa);
  CHECK(back.size() == a.size());
  CHECK((back.head_position.back() - a.head_position.back()).norm() < 1e-12);

  REQUIRE_FALSE(a.snapshots.empty());
  std::stringstream bin;
  write_snapshots(bin, a.snapshots);
  const auto snaps = read_snapshots(bin);
  REQUIRE(snaps.size() == a.snapshots.size());
  CHECK(snaps.back().q == a.snapshots.back().q);
  CHECK(snaps.back().time == a.snapshots.back().time);
}

TEST_CASE("initial yaw rotates the start pose") {
  const auto c = coarse();
  SimulationOptions o;
  o.initial_yaw = kPi / 2;
  const auto traj = simulate(c, ActuationSchedule::constant(0.0, 0.1), o);
  CHECK(traj.head_axis.front().x() == doctest::Approx(1.0));
}
