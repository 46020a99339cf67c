#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flagsim/error.hpp"
#include "flagsim/planner.hpp"

using namespace flagsim;

namespace {

MotionPrimitiveMap sample_map(double lag = 0.0, double kick = 0.0) {
  MotionPrimitiveMap m;
  m.omega_H = 15.0;
  m.omega_bar_H = 33.1;
  m.omega_yr = -0.3;
  m.R_yr = 0.096;
  m.path_speed = 0.0288;
  m.heading_signed = 1.64;
  m.theta_heading = 1.64;
  m.tail_length = 0.11;
  m.switch_lag = lag;
  m.switch_kick = Vec2(kick, 0.0);
  return m;
}

}  // namespace

TEST_CASE("unicycle arc model") {
  const auto m = sample_map();
  const Pose2 p = advance(m, {}, 1, 2.0);
  CHECK(p.psi == doctest::Approx(-0.6));
  CHECK(p.p.norm() == doctest::Approx(2 * m.R_yr * std::sin(0.3)).epsilon(1e-9));
  const Pose2 q = advance(m, {}, -1, 2.0);
  CHECK(q.psi == doctest::Approx(0.6));
  const Pose2 z = advance(m, {}, 1, 0.0);
  CHECK(z.p.norm() == 0.0);
}

TEST_CASE("line plans reach the target in the model") {
  for (double lag : {0.0, -0.09}) {
    const auto m = sample_map(lag, 0.002);
    const auto plan = plan_line(m, 0.5);
    REQUIRE(plan.waypoints.size() >= 2);
    CHECK((plan.waypoints.back().p - Vec2(0.5, 0.0)).norm() < 1e-6);
    Pose2 start;
    start.psi = plan.initial_yaw;
    const Pose2 end = predict_pose_at(m, plan.schedule, plan.schedule.duration(), start);
    CHECK((end.p - Vec2(0.5, 0.0)).norm() < 1e-6);
    CHECK(plan.half_period <= default_half_period(m) + 1e-12);
  }
}

TEST_CASE("closed square returns to its start in the model") {
  const auto m = sample_map(-0.09, 0.002);
  const double side = 20 * m.R_yr;
  const std::vector<Vec2> v{{0, 0}, {side, 0}, {side, side}, {0, side}};
  const auto plan = plan_polygon(m, v, true);
  Pose2 start;
  start.psi = plan.initial_yaw;
  const auto poses = predict_poses(m, plan.schedule, start);
  const Vec2 first = plan.waypoints.front().p;
  CHECK((poses.back().p - first).norm() < 1e-3 * side);
  for (const auto& w : plan.waypoints) {
    const Pose2 p = predict_pose_at(m, plan.schedule, w.t, start);
    CHECK((p.p - w.p).norm() < 1e-3 * side);
  }
}

TEST_CASE("circle plans keep predicted vertices on the target circle") {
  const auto m = sample_map(-0.09, 0.002);
  const double r = 5 * m.R_yr;
  const auto plan = plan_circle(m, r, 1.0);
  CHECK(plan.circle_radius == doctest::Approx(r));
  CHECK(plan.theta_arc > plan.delta_theta);
  double worst = 0.0;
  for (const auto& w : plan.waypoints) worst = std::max(worst, std::abs((w.p - plan.circle_center).norm() - r));
  CHECK(worst < 0.01 * r);
  const auto reverse = plan_circle(m, r, -1.0);
  CHECK(reverse.schedule.omegas().front() == -plan.schedule.omegas().front());
}

TEST_CASE("infeasible requests raise PlanError") {
  const auto m = sample_map();
  CHECK_THROWS_AS(plan_line(m, -1.0), PlanError);
  CHECK_THROWS_AS(plan_circle(m, 0.0, 1.0), PlanError);
  CHECK_THROWS_AS(plan_circle(m, 1.0, 1.0, 4.0), PlanError);
  CHECK_THROWS_AS(plan_polygon(m, {Vec2(0, 0)}, false), PlanError);
  auto straight = m;
  straight.omega_yr = 0.0;
  CHECK_THROWS_AS(plan_line(straight, 1.0), PlanError);
}

TEST_CASE("path spec parse and serialize") {
  const auto spec = parse_path_spec(
      "# square\nvariant = polygon\nvertex_m = 0, 0\nvertex_m = 1, 0\nvertex_m = 1, 1\nclosed = true\n");
  CHECK(spec.variant == PathSpec::Variant::polygon);
  CHECK(spec.vertices.size() == 3);
  CHECK(spec.closed);
  const auto again = parse_path_spec(serialize_path_spec(spec));
  CHECK(serialize_path_spec(again) == serialize_path_spec(spec));
  CHECK_THROWS_AS(parse_path_spec("variant = spiral\n"), ConfigError);
  CHECK_THROWS_AS(parse_path_spec("variant = line\nlength_m = x\n"), ConfigError);
}

TEST_CASE("primitive map round trip") {
  const auto m = sample_map(-0.0897, 0.00196);
  std::stringstream io;
  write_primitive_map(io, m);
  const auto back = parse_primitive_map(io.str());
  CHECK(back.omega_yr == m.omega_yr);
  CHECK(back.switch_lag == m.switch_lag);
  CHECK(back.switch_kick == m.switch_kick);
  CHECK_THROWS_AS(parse_primitive_map("omega_H_rad_s = 1\n"), ConfigError);
}
