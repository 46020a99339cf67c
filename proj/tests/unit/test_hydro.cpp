#include <doctest.h>

#include <cmath>

#include "flagsim/config.hpp"
#include "flagsim/error.hpp"
#include "flagsim/hydro.hpp"

using namespace flagsim;

TEST_CASE("RFT coefficients at l/r0 = 34.375") {
  CHECK(rft_parallel(1.0, 34.375) == doctest::Approx(2.0686).epsilon(1e-3));
  CHECK(rft_perpendicular(1.0, 34.375) == doctest::Approx(3.1125).epsilon(1e-3));
  CHECK(rft_parallel(2.0, 34.375) == doctest::Approx(2.0 * rft_parallel(1.0, 34.375)));
}

TEST_CASE("lateral force constant of the interface profile") {
  const InterfaceProfile p{0.7, 20.0, 1.0, 1.0};
  const auto c = lateral_constant_oracle(p);
  CHECK(c.lateral == doctest::Approx(1.403).epsilon(0.005));
  CHECK(std::abs(c.vertical) < 1e-8);
  CHECK(viscosity_at(0.7, p) == doctest::Approx(0.5));
  CHECK(viscosity_at(-5.0, p) == doctest::Approx(1.0));
}

TEST_CASE("RFT node force is dissipative and anisotropic") {
  const auto cfg = preset("fitted_sec2");
  const auto d = DragCoefficients::from(cfg);
  const Vec3 t = Vec3::UnitZ();
  const Vec3 along = rft_node_force(Vec3(0, 0, 1), t, 0.01, d);
  const Vec3 across = rft_node_force(Vec3(1, 0, 0), t, 0.01, d);
  CHECK(along.z() == doctest::Approx(-d.mu_par * 0.01));
  CHECK(across.x() == doctest::Approx(-d.mu_perp * 0.01));
  const Vec3 v(0.3, -0.2, 0.7);
  CHECK(rft_node_force(v, t, 0.01, d).dot(v) < 0.0);
}

TEST_CASE("head drag terms") {
  const auto cfg = preset("fitted_sec2");
  const Vec3 f = head_translation_drag(Vec3(1, 0, 0), cfg);
  CHECK(f.x() == doctest::Approx(-cfg.c_t * 6 * kPi * cfg.mu0 * cfg.head_radius));
  CHECK(head_rotation_torque(2.0, cfg) ==
        doctest::Approx(-cfg.c_r * 8 * kPi * cfg.mu0 * std::pow(cfg.head_radius, 3) * 2.0));
  const Vec3 lat = head_lateral_force(1.0, Vec3::UnitZ(), cfg);
  CHECK(lat.norm() == doctest::Approx(cfg.c_yr * cfg.mu0 * cfg.head_radius * cfg.head_length));
  CHECK(std::abs(lat.dot(Vec3::UnitZ())) < 1e-15);
  CHECK(std::abs(lat.y()) < 1e-15);
  CHECK_THROWS_AS(lateral_direction(Vec3::UnitY()), GeometryError);
}
