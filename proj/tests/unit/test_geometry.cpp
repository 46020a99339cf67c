#include <doctest.h>

#include <cmath>

#include "flagsim/geometry.hpp"

using namespace flagsim;

TEST_CASE("parallel transport keeps the frame orthonormal and adapted") {
  Frame f;
  const Vec3 t_new = Vec3(1.0, 2.0, 0.5).normalized();
  const Frame g = parallel_transport(f, t_new);
  CHECK((g.t - t_new).norm() < 1e-14);
  CHECK(orthonormality_error(g) < 1e-13);
  CHECK((g.d2 - g.t.cross(g.d1)).norm() < 1e-13);
}

TEST_CASE("transport is the identity for unchanged tangents") {
  Frame f;
  f.d1 = Vec3(std::cos(0.3), std::sin(0.3), 0.0);
  f.d2 = f.t.cross(f.d1);
  const Frame g = parallel_transport(f, f.t);
  CHECK((g.d1 - f.d1).norm() < 1e-15);
}

TEST_CASE("antiparallel transport flips the tangent about d1") {
  Frame f;
  const Frame g = parallel_transport(f, -f.t);
  CHECK((g.t + f.t).norm() < 1e-14);
  CHECK((g.d1 - f.d1).norm() < 1e-14);
  CHECK(orthonormality_error(g) < 1e-13);
}

TEST_CASE("transport_vector leaves the rotation axis fixed") {
  const Vec3 from = Vec3::UnitZ();
  const Vec3 to = Vec3::UnitX();
  const Vec3 axis = from.cross(to).normalized();
  CHECK((transport_vector(axis, from, to, Vec3::UnitX()) - axis).norm() < 1e-14);
  CHECK((transport_vector(from, from, to, Vec3::UnitX()) - to).norm() < 1e-14);
}

TEST_CASE("signed angle and unwrapping") {
  CHECK(signed_angle(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()) == doctest::Approx(kPi / 2));
  CHECK(signed_angle(Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()) == doctest::Approx(-kPi / 2));
  CHECK(unwrap_near(0.1, 2 * kPi) == doctest::Approx(0.1 + 2 * kPi));
  CHECK(unwrap_near(-3.0, 3.2) == doctest::Approx(-3.0 + 2 * kPi));
}

TEST_CASE("reorthonormalize repairs a perturbed frame") {
  Frame f;
  f.d1 += Vec3(0.0, 1e-3, 2e-3);
  reorthonormalize(f);
  CHECK(orthonormality_error(f) < 1e-14);
}
