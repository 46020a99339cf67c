#include <doctest.h>

#include <cmath>

#include "flagsim/analysis.hpp"
#include "flagsim/config.hpp"
#include "flagsim/error.hpp"

using namespace flagsim;

TEST_CASE("presets") {
  const auto names = preset_names();
  REQUIRE(names.size() == 2);
  const auto fitted = preset("fitted_sec2");
  CHECK(fitted.tails == 4);
  CHECK(fitted.c_t == 4.0);
  CHECK(fitted.c_r == 2.06);
  CHECK(fitted.c_yr == 6.0);
  const auto control = preset("control_sec4");
  CHECK(control.tails == 2);
  CHECK(control.c_yr == 2.0);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("intrinsic time scale and automatic step") {
  const auto c = preset("control_sec4");
  CHECK(nondimensionalize(c).time_scale == doctest::Approx(2.207).epsilon(0.005));
  CHECK(c.time_step() == doctest::Approx(1e-3 * c.time_scale()));
  auto d = c;
  d.dt = 0.01;
  CHECK(d.time_step() == 0.01);
}

TEST_CASE("serialize and parse round-trip exactly") {
  auto c = preset("fitted_sec2");
  c.tail_length = 0.0937;
  c.interface_hold = 0.5;
  const auto back = parse_config(serialize_config(c));
  CHECK(serialize_config(back) == serialize_config(c));
  CHECK(back.tail_length == c.tail_length);
}

TEST_CASE("parse errors name the field") {
  const std::string good = serialize_config(preset("fitted_sec2"));
  std::string missing = good;
  missing.erase(missing.find("c_r = "), good.find('\n', good.find("c_r = ")) - good.find("c_r = ") + 1);
  try {
    parse_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field().find("c_r") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(good + "bogus = 1\n"), ConfigError);
}

TEST_CASE("validation rejects nonphysical values") {
  auto c = preset("fitted_sec2");
  CHECK_NOTHROW(c.validate());
  c.tails = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fitted_sec2");
  c.tail_radius = c.tail_length;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fitted_sec2");
  c.mu0 = std::nan("");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fitted_sec2");
  c.interface_hold = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
