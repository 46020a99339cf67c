#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "flagsim/analysis.hpp"
#include "flagsim/error.hpp"

using namespace flagsim;

namespace {

Vec3 lift(const Vec2& h) { return {h.y(), 0.0, h.x()}; }

// Head moving on a circle in the (z, x) plane at rate w with its axis turned
// by -phi from the direction of travel.
Trajectory synthetic_circle(double radius, double w, double phi, double duration) {
  Trajectory t;
  const Vec2 c(0.3, -0.1);
  for (double s = 0.0; s <= duration; s += 0.05) {
    const double a = w * s;
    const Vec2 p = c + radius * Vec2(std::cos(a), std::sin(a));
    const Vec2 v = (w > 0 ? 1.0 : -1.0) * Vec2(-std::sin(a), std::cos(a));
    const Vec2 axis = Eigen::Rotation2Dd(-phi) * v;
    t.time.push_back(s);
    t.head_position.push_back(lift(p));
    t.head_axis.push_back(lift(axis));
    t.omega_h.push_back(5.0);
    t.omega_t.push_back(-6.0);
    t.omega_motor.push_back(11.0);
  }
  return t;
}

}  // namespace

TEST_CASE("circle fit") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(2.0 + 0.5 * std::cos(0.2 * i), 1.0 + 0.5 * std::sin(0.2 * i));
  const auto fit = fit_circle(pts);
  CHECK(fit.radius == doctest::Approx(0.5));
  CHECK((fit.center - Vec2(2.0, 1.0)).norm() < 1e-9);
  CHECK(fit.residual < 1e-9);
  CHECK_THROWS_AS(fit_circle({Vec2(0, 0), Vec2(1, 1)}), FitError);
  CHECK_THROWS_AS(fit_circle({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2), Vec2(3, 3)}), FitError);
}

TEST_CASE("steady-state summary of a synthetic circle") {
  for (double w : {0.4, -0.4}) {
    const auto traj = synthetic_circle(0.1, w, 1.2, 40.0);
    const auto s = summarize_steady(traj);
    CHECK(s.omega_yr == doctest::Approx(w).epsilon(1e-3));
    CHECK(s.R_yr == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(s.theta_heading == doctest::Approx(1.2).epsilon(1e-3));
    CHECK(s.path_speed == doctest::Approx(0.04).epsilon(1e-3));
    CHECK(s.omega_h == doctest::Approx(5.0));
    CHECK(s.omega_t == doctest::Approx(-6.0));
  }
}

TEST_CASE("nondimensional scale") {
  RobotConfig c;
  const auto s = nondimensionalize(c);
  CHECK(s.omega_bar(1.0) == doctest::Approx(s.time_scale));
  CHECK(s.t_bar(s.time_scale) == doctest::Approx(1.0));
}

TEST_CASE("measurement CSV round trip") {
  const std::vector<Measurement> m{{3, 0.07, 15.0, 6.1, -0.2}, {4, 0.11, 15.0, 6.6, -0.3}};
  std::stringstream io;
  write_measurements_csv(io, m);
  const auto back = read_measurements_csv(io);
  REQUIRE(back.size() == 2);
  CHECK(back[1].tails == 4);
  CHECK(back[1].omega_yr == -0.3);
  std::stringstream bad("N,l_m,omega_motor_rad_s,omega_h_rad_s,omega_yr_rad_s\n3,abc,1,2,3\n");
  CHECK_THROWS_AS(read_measurements_csv(bad), ConfigError);
}

TEST_CASE("position interpolation") {
  const auto traj = synthetic_circle(0.1, 0.4, 0.0, 2.0);
  const Vec3 mid = position_at(traj, 0.025);
  CHECK((mid - 0.5 * (traj.head_position[0] + traj.head_position[1])).norm() < 1e-15);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(37);
  parallel_for(37, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
}
