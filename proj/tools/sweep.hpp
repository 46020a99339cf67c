#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flagsim/config.hpp"

namespace flagsim::cli {

/// Grid over the dimensionless parameter set. One `name = v1, v2, ...` line
/// per swept parameter; names are c_t, c_r, c_yr, l_over_R, L_over_R,
/// l_over_r0, omega_bar, N. The head radius R stays fixed. omega_bar is
/// required.
struct SweepSpec {
  std::vector<std::pair<std::string, std::vector<double>>> axes;  // file order
  std::size_t points() const;
};

SweepSpec parse_sweep_spec(std::string_view text);
std::string serialize_sweep_spec(const SweepSpec& spec);

struct SweepPoint {
  RobotConfig config;
  double omega_bar = 0.0;
  double omega = 0.0;  // [rad/s]
};

/// Grid point `index` in row-major order (last axis fastest).
SweepPoint sweep_point(const RobotConfig& base, const SweepSpec& spec, std::size_t index);

struct SweepOptions {
  int jobs = 1;
  double duration_time_scales = 6.0;
};

/// Runs every grid point and writes one summary row per point.
void run_sweep(std::ostream& summary_csv, const RobotConfig& base, const SweepSpec& spec, const SweepOptions& options);

}  // namespace flagsim::cli
