#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "flagsim/config.hpp"
#include "flagsim/elastic.hpp"
#include "flagsim/rod.hpp"

namespace flagsim {

/// Piecewise-constant motor angular velocity. Entry i holds from
/// `switch_times[i]` until the next switch (or `duration`).
class ActuationSchedule {
 public:
  ActuationSchedule() = default;
  ActuationSchedule(std::vector<double> switch_times, std::vector<double> omegas, double duration);

  static ActuationSchedule constant(double omega, double duration);

  double omega_at(double t) const;
  double duration() const { return duration_; }
  const std::vector<double>& switch_times() const { return times_; }
  const std::vector<double>& omegas() const { return omegas_; }
  std::size_t size() const { return times_.size(); }
  double segment_end(std::size_t i) const { return i + 1 < times_.size() ? times_[i + 1] : duration_; }

  /// Appends a constant interval of length `dt` (merging with the last entry
  /// when omega is unchanged).
  void append(double omega, double interval);
  ActuationSchedule negated() const;

 private:
  std::vector<double> times_;
  std::vector<double> omegas_;
  double duration_ = 0.0;
};

/// CSV `t_switch_s,omega_rad_s` preceded by a `# duration_s: <value>` line.
void write_schedule_csv(std::ostream& out, const ActuationSchedule& schedule);
ActuationSchedule read_schedule_csv(std::istream& in);
ActuationSchedule load_schedule(const std::string& path);

/// Lumped mass per DOF. Tail nodes rho_line l_k; head nodes share head_mass;
/// twist DOFs m r^2 / 2 with the owning segment's mass and radius.
VectorXd lumped_masses(const RobotConfig& config, const Topology& topology);

/// tau0 at the motor stencil advances by omega * dt (accumulated motor angle).
void apply_actuation(RobotState& state, const Topology& topology, double omega, double dt);

struct StepStats {
  int newton_iterations = 0;
  int halvings = 0;
  double residual = 0.0;
};

/// Backward-Euler integrator with Newton iterations; owns the solver
/// workspace for one robot.
class Integrator {
 public:
  Integrator(RobotConfig config, const Topology& topology);
  ~Integrator();
  Integrator(Integrator&&) noexcept;

  /// Advances `state` by dt with motor speed omega. On Newton failure the
  /// step is halved up to four times before throwing SolverError.
  StepStats step(RobotState& state, double omega, double dt);

  const VectorXd& masses() const { return masses_; }
  void scale_masses(double factor) { masses_ *= factor; }
  const StiffnessSet& stiffness() const { return stiffness_; }
  StiffnessSet& stiffness() { return stiffness_; }

 private:
  bool try_step(RobotState& state, double omega, double dt, StepStats& stats);
  StepStats step_recursive(RobotState& state, double omega, double dt, int depth);

  RobotConfig config_;
  const Topology* topology_;
  StiffnessSet stiffness_;
  VectorXd masses_;
  struct Workspace;
  std::unique_ptr<Workspace> work_;
};

/// Convenience wrapper constructing a temporary Integrator.
RobotState step(RobotState state, const Topology& topology, const RobotConfig& config, double omega, double dt);

struct Snapshot {
  double time = 0.0;
  VectorXd q;
  VectorXd qdot;
};

struct Trajectory {
  std::vector<double> time;
  std::vector<Vec3> head_position;  // x1
  std::vector<Vec3> head_axis;      // unit tangent of the head edge
  std::vector<double> omega_h;
  std::vector<double> omega_t;
  std::vector<double> omega_motor;
  std::vector<Snapshot> snapshots;
  bool vertical_drift_exceeded = false;  // |y - y0| of the head beyond 0.05 R

  std::size_t size() const { return time.size(); }
};

struct SimulationOptions {
  double output_stride = 0.0;  // [s]; <= 0 records every step
  int snapshot_stride = 0;     // record a full state every k samples; 0 disables
  double mass_scale = 1.0;
  double tail_stiffness_scale = 1.0;  // multiplies tail EI and GJ
  double initial_yaw = 0.0;           // [rad] rotation of the start pose about +y
};

Trajectory simulate(const RobotConfig& config, const ActuationSchedule& schedule,
                    const SimulationOptions& options = {});

/// Header `t,x,y,z,ax,ay,az,omega_h,omega_t,omega_motor`, 12 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

/// Length-prefixed little-endian records: u32 payload bytes, f64 time,
/// u32 ndof, ndof f64 of q, ndof f64 of qdot.
void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_snapshots(std::istream& in);

}  // namespace flagsim
