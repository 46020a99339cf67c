#pragma once

#include <string>

namespace flagsim::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadInput = 2, kSolverFailure = 3 };

struct SimulateArgs {
  std::string config;
  std::string schedule;
  std::string out;
  double stride = 0.0;  // [s]; 0 selects 1% of the intrinsic time scale
  int snapshot_stride = 0;
};

struct CharacterizeArgs {
  std::string config;
  std::string out;
  double omega = 0.0;      // [rad/s]; ignored when omega_bar is set
  double omega_bar = 0.0;
  double duration_time_scales = 6.0;
  int switching_periods = 6;
};

struct CalibrateArgs {
  std::string config;  // geometry and numerics; its drag coefficients are ignored
  std::string measurements;
  std::string validation;  // optional second dataset, reported but not fitted
  std::string out;
  int jobs = 1;
  int seed_grid = 5;
  int max_evaluations = 400;
  double step_time_scales = 0.02;
  double duration_time_scales = 4.0;
};

struct PlanArgs {
  std::string config;
  std::string path_spec;
  std::string out;
  std::string map;  // precomputed primitive map; characterized when empty
  double omega = 0.0;
  double omega_bar = 0.0;
  bool verify = false;
  double stride = 0.0;  // [s]; 0 selects a quarter of the half-period
};

struct SweepArgs {
  std::string config;
  std::string sweep;
  std::string out;
  int jobs = 1;
  double duration_time_scales = 6.0;
};

/// Each command writes its outputs plus manifest.json into `out`, prints a
/// short report to stdout, and maps errors to exit codes (2: invalid input,
/// 3: solver failure).
int cmd_simulate(const SimulateArgs& args);
int cmd_characterize(const CharacterizeArgs& args);
int cmd_calibrate(const CalibrateArgs& args);
int cmd_plan(const PlanArgs& args);
int cmd_sweep(const SweepArgs& args);

}  // namespace flagsim::cli
