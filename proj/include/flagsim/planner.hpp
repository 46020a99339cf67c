#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flagsim/analysis.hpp"
#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"

namespace flagsim {

/// Constant-speed turning behaviour at +omega_H. Running at -omega_H gives
/// the mirror image: yaw rate and signed heading change sign.
struct MotionPrimitiveMap {
  double omega_H = 0.0;         // [rad/s]
  double omega_bar_H = 0.0;
  double omega_yr = 0.0;        // signed yaw rate at +omega_H [rad/s]
  double R_yr = 0.0;            // [m]
  double theta_heading = 0.0;   // unsigned heading angle [rad]
  double heading_signed = 0.0;  // signed angle from head axis to travel direction at +omega_H
  double path_speed = 0.0;      // [m/s]
  double tail_length = 0.0;     // [m]
  double fit_residual = 0.0;    // [m]
  // Response to a motor reversal (and to start-up): the new arc is shortened
  // by switch_lag (lengthened when negative) and the head is displaced by
  // switch_kick in the head-axis frame, mirrored for -omega_H.
  double switch_lag = 0.0;             // [s]
  Vec2 switch_kick = Vec2::Zero();     // [m]
};

struct CharacterizeOptions {
  double duration_time_scales = 6.0;
  int switching_periods = 6;  // square-wave run used to fit the switch response; 0 skips it
};

/// Constant-omega run summarized into a primitive map. Throws PlanError for
/// omega_H = 0 and SteadyStateError when no steady circle forms.
MotionPrimitiveMap characterize(const RobotConfig& config, double omega_H, const CharacterizeOptions& options = {});
MotionPrimitiveMap map_from_summary(const RobotConfig& config, double omega_H, const SteadyStateSummary& summary);

struct SwitchResponse {
  double lag = 0.0;
  Vec2 kick = Vec2::Zero();
};

/// Fits the switch response to a run driven by a square wave of half-period
/// T whose first reversal (to -omega_H) is at `first_switch`. The first
/// period is discarded; at least three must remain.
SwitchResponse fit_switch_response(const MotionPrimitiveMap& map, const Trajectory& traj, double T,
                                   double first_switch);
/// Runs `periods` square-wave periods (half-period T, 0 selects the default)
/// and fits the response.
SwitchResponse measure_switch_response(const RobotConfig& config, const MotionPrimitiveMap& map, int periods,
                                       double T = 0.0);

/// `key = value` lines with 17 significant digits; every field is required on read.
void write_primitive_map(std::ostream& out, const MotionPrimitiveMap& map);
MotionPrimitiveMap parse_primitive_map(std::string_view text);
MotionPrimitiveMap load_primitive_map(const std::string& path);

/// Planar pose in the horizontal (z, x) plane; psi is the head-axis angle.
struct Pose2 {
  Vec2 p = Vec2::Zero();
  double psi = 0.0;
};

/// Unicycle arc model: holding sign s for `duration` turns the axis at
/// s * omega_yr while the head moves at path_speed along psi + s * heading.
Pose2 advance(const MotionPrimitiveMap& map, const Pose2& pose, int sign, double duration);

/// Poses at every schedule switch and at the end, starting from `start`.
/// Every sign change, and t = 0, applies the switch response.
std::vector<Pose2> predict_poses(const MotionPrimitiveMap& map, const ActuationSchedule& schedule,
                                 const Pose2& start = {});
Pose2 predict_pose_at(const MotionPrimitiveMap& map, const ActuationSchedule& schedule, double t,
                      const Pose2& start = {});

struct Waypoint {
  double t = 0.0;  // [s]
  Vec2 p;          // planned head position relative to the start [m]
};

struct Plan {
  ActuationSchedule schedule;
  double initial_yaw = 0.0;  // start orientation of the head axis [rad]
  double half_period = 0.0;  // T of the zig-zag legs [s]
  std::vector<Waypoint> waypoints;
  Vec2 circle_center = Vec2::Zero();  // circle plans only
  double circle_radius = 0.0;
  double theta_arc = 0.0;             // circle plans only
  double delta_theta = 0.0;
};

/// Half-period giving an arc chord of one tail length (capped below a
/// half-turn).
double default_half_period(const MotionPrimitiveMap& map);

/// Zig-zag square wave of half-period T (0 selects the default): a leading
/// half-period, alternating full half-periods, and a trailing half-period
/// returning the axis to its mean. T is shortened so the net advance equals
/// `length` after ceil(length / advance-per-period) periods.
Plan plan_line(const MotionPrimitiveMap& map, double length, double T = 0.0);

/// Zig-zag circle: alternating t_a = theta_arc / |omega_yr| and
/// t_b = (theta_arc - delta_theta) / |omega_yr| with opposite signs, each
/// lengthened by switch_lag.
/// `turns` > 0 circles counterclockwise. delta_theta = 0 derives it from the
/// default half-period; otherwise theta_arc is solved for. Throws PlanError
/// when no feasible pair exists.
Plan plan_circle(const MotionPrimitiveMap& map, double radius, double turns, double delta_theta = 0.0);

/// Straight zig-zag legs joined by constant-omega turns of alpha / |omega_yr|
/// (plus switch_lag when the turn reverses the motor).
/// Legs are shortened by the projections of the turn chords. A closed
/// polygon also turns at the first vertex and starts where that turn ends.
Plan plan_polygon(const MotionPrimitiveMap& map, const std::vector<Vec2>& vertices, bool closed, double T = 0.0);

struct PathSpec {
  enum class Variant { line, circle, polygon };
  Variant variant = Variant::line;
  double length = 0.0;
  double radius = 0.0;
  double turns = 1.0;
  double delta_theta = 0.0;
  std::vector<Vec2> vertices;
  bool closed = false;
  double half_period = 0.0;
};

/// `key = value` lines: `variant` (line|circle|polygon), `length_m`,
/// `radius_m`, `turns`, `delta_theta_rad`, `half_period_s`, repeated
/// `vertex_m = u, w`, `closed` (true|false). '#' starts a comment.
PathSpec parse_path_spec(std::string_view text);
PathSpec load_path_spec(const std::string& path);
std::string serialize_path_spec(const PathSpec& spec);

Plan plan_path(const MotionPrimitiveMap& map, const PathSpec& spec);

/// Runs the plan in the simulator from the aligned start pose.
Trajectory execute_plan(const RobotConfig& config, const Plan& plan, double output_stride);

struct PlanAudit {
  std::vector<Vec2> executed;  // head positions at waypoint times, relative to the start
  double max_error = 0.0;      // largest planned-vs-executed waypoint distance [m]
  double rms_error = 0.0;
  double closure = 0.0;        // |end - start| of the executed run [m]
  double radial_rms = 0.0;     // circle plans: RMS of |p - center| - radius over waypoints [m]
};

PlanAudit audit_plan(const Plan& plan, const Trajectory& traj);

}  // namespace flagsim
