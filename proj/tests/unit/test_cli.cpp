#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "flagsim/error.hpp"
#include "manifest.hpp"
#include "sweep.hpp"

using namespace flagsim;
using namespace flagsim::cli;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest hash is order independent and recomputable") {
  const auto dir = std::filesystem::temp_directory_path() / "flagsim_manifest_test";
  std::filesystem::create_directories(dir);
  RunManifest a("simulate", dir), b("simulate", dir);
  a.add_input("config", "x = 1\n");
  a.add_input("schedule", "0,15\n");
  b.add_input("schedule", "0,15\n");
  b.add_input("config", "x = 1\n");
  CHECK(a.input_hash() == b.input_hash());
  a.add_output("trajectory.csv");
  const auto path = a.write();
  CHECK(recompute_manifest_hash(path) == a.input_hash());
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep spec") {
  const auto spec = parse_sweep_spec("omega_bar = 10, 20\nN = 2, 3, 4\n");
  CHECK(spec.points() == 6);
  const auto base = preset("fitted_sec2");
  const auto p = sweep_point(base, spec, 5);
  CHECK(p.config.tails == 4);
  CHECK(p.omega_bar == 20.0);
  CHECK(p.omega * p.config.time_scale() == doctest::Approx(20.0));
  const auto q = sweep_point(base, parse_sweep_spec("omega_bar = 10\nl_over_R = 5\n"), 0);
  CHECK(q.config.tail_length == doctest::Approx(5 * base.head_radius));
  CHECK(q.config.tail_length / q.config.tail_radius == doctest::Approx(base.tail_length / base.tail_radius));
  CHECK_THROWS_AS(parse_sweep_spec("N = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_spec("omega_bar = 1\nfoo = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_spec("omega_bar = 1\nomega_bar = 2\n"), ConfigError);
  CHECK(parse_sweep_spec(serialize_sweep_spec(spec)).points() == 6);
}
