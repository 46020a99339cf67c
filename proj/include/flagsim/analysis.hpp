#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"

namespace flagsim {

/// Horizontal projection used throughout the analysis: (z, x). With this
/// ordering a counterclockwise turn in the plane is a positive rotation
/// about the vertical +y axis.
inline Vec2 horizontal(const Vec3& p) { return {p.z(), p.x()}; }

struct CircleFit {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double residual = 0.0;  // RMS radial error
};

/// Algebraic (Kasa) fit refined by Gauss-Newton on the geometric error.
/// Throws FitError for fewer than three points or near-collinear input.
CircleFit fit_circle(const std::vector<Vec2>& points);

struct TimeWindow {
  double begin = -1.0;  // negative: discard the first 25% of the run
  double end = -1.0;    // negative: end of the run
};

struct SteadyStateSummary {
  double omega_h = 0.0;   // [rad/s]
  double omega_t = 0.0;
  double omega_yr = 0.0;  // positive = counterclockwise about +y
  double R_yr = 0.0;      // [m]
  double theta_heading = 0.0;  // head axis vs. direction of travel [rad]
  double heading_signed = 0.0; // same angle, counterclockwise positive from the axis
  Vec2 circle_center = Vec2::Zero();
  double fit_residual = 0.0;
  double path_speed = 0.0;     // |omega_yr| R_yr
  double axial_speed = 0.0;    // mean head velocity along the head axis
  double window_begin = 0.0;
  double window_end = 0.0;
};

/// Throws SteadyStateError when the fit residual exceeds 5% of the radius.
SteadyStateSummary summarize_steady(const Trajectory& traj, TimeWindow window = {});

/// Mean velocity of the head projected on its own axis over the window.
double mean_axial_speed(const Trajectory& traj, TimeWindow window = {});

struct SwitchingSummary {
  double theta_heading = 0.0;  // head axis vs. net displacement [rad]
  double v = 0.0;              // net straight-line speed [m/s]
  double period = 0.0;         // 2T [s]
  Vec2 direction = Vec2::UnitX();
  std::vector<Vec2> displacements;  // per period, first period dropped
};

/// Net motion of a run driven by a square wave of half-period T. Period
/// boundaries start at `first_switch`; NaN detects the first sign change of
/// the recorded motor speed. Throws SteadyStateError when fewer than three
/// periods remain or per-period displacements scatter by more than 20%.
SwitchingSummary summarize_switching(const Trajectory& traj, double T,
                                     double first_switch = std::numeric_limits<double>::quiet_NaN());

/// Head position at time t by linear interpolation of the samples.
Vec3 position_at(const Trajectory& traj, double t);

struct NondimScale {
  double time_scale = 0.0;  // mu0 l^4 / EI [s]
  double omega_bar(double omega) const { return omega * time_scale; }
  double t_bar(double t) const { return t / time_scale; }
};

NondimScale nondimensionalize(const RobotConfig& config);

struct Measurement {
  int tails = 0;
  double tail_length = 0.0;  // [m]
  double omega_motor = 0.0;  // [rad/s]
  double omega_h = 0.0;
  double omega_yr = 0.0;
};

/// CSV `N,l_m,omega_motor_rad_s,omega_h_rad_s,omega_yr_rad_s`.
std::vector<Measurement> read_measurements_csv(std::istream& in);
std::vector<Measurement> load_measurements(const std::string& path);
void write_measurements_csv(std::ostream& out, const std::vector<Measurement>& measurements);

struct CalibrationOptions {
  int seed_grid = 5;  // points per axis
  double lower = 0.5;
  double upper = 10.0;
  int jobs = 1;
  int max_evaluations = 400;  // Nelder-Mead objective evaluations
  double f_tol = 1e-7;
  double x_tol = 1e-5;
  double duration_time_scales = 4.0;  // simulated time per prediction
  double step_time_scales = 0.0;      // > 0 overrides dt as a fraction of each site's time scale
  double max_step_angle = 0.3;        // > 0 caps motor rotation per step [rad]
};

/// Steady-state response of `config` at motor speed omega, simulated for
/// `duration_time_scales` intrinsic time scales.
SteadyStateSummary predict_steady(RobotConfig config, double omega, const CalibrationOptions& options);

/// Simulated counterparts of `sites` (N, l, omega) under `base` numerics.
std::vector<Measurement> synthesize_measurements(const RobotConfig& base, const std::vector<Measurement>& sites,
                                                 const CalibrationOptions& options);

struct MeasurementResidual {
  Measurement measured;
  double predicted_h = 0.0;
  double predicted_yr = 0.0;
  double error_h = 0.0;  // relative
  double error_yr = 0.0;
  std::string failure;   // non-empty when the prediction failed
};

struct FitEvaluation {
  double error = 0.0;  // mean of the relative errors on omega_h and omega_yr
  std::vector<MeasurementResidual> residuals;
  bool ok() const { return error < std::numeric_limits<double>::infinity(); }
};

/// Objective at one coefficient triple; infinite when any prediction fails.
FitEvaluation evaluate_fit(const std::vector<Measurement>& measurements, const RobotConfig& base,
                           const std::array<double, 3>& coefficients, const CalibrationOptions& options);

struct CalibrationResult {
  std::array<double, 3> coefficients{};  // C_t, C_r, C_yr
  double fit_error = 0.0;
  int evaluations = 0;
  std::array<double, 3> sensitivity{};  // d(error) / d(ln C_i)
  std::vector<MeasurementResidual> residuals;
};

/// Grid seed over [lower, upper]^3 followed by bounded Nelder-Mead.
CalibrationResult calibrate(const std::vector<Measurement>& measurements, const RobotConfig& base,
                            const CalibrationOptions& options = {});

/// `key: value` lines followed by the per-measurement residual table.
void write_calibration_report(std::ostream& out, const CalibrationResult& result);

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace flagsim
