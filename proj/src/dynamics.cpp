#include "flagsim/dynamics.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>

#include "flagsim/error.hpp"
#include "flagsim/hydro.hpp"
#include "flagsim/log.hpp"

namespace flagsim {

// ---------------------------------------------------------------- schedule

ActuationSchedule::ActuationSchedule(std::vector<double> switch_times, std::vector<double> omegas, double duration)
    : times_(std::move(switch_times)), omegas_(std::move(omegas)), duration_(duration) {
  if (times_.empty() || times_.size() != omegas_.size())
    throw ConfigError("schedule", 0, "schedule needs matching, non-empty switch and omega lists");
  if (times_.front() != 0.0) throw ConfigError("t_switch_s", 0, "schedule must start at t = 0");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw ConfigError("t_switch_s", 0, "switch times must be strictly increasing");
  if (!(duration_ > times_.back())) throw ConfigError("duration_s", 0, "duration must exceed the last switch time");
}

ActuationSchedule ActuationSchedule::constant(double omega, double duration) {
  return ActuationSchedule({0.0}, {omega}, duration);
}

double ActuationSchedule::omega_at(double t) const {
  std::size_t i = 0;
  while (i + 1 < times_.size() && times_[i + 1] <= t) ++i;
  return omegas_[i];
}

void ActuationSchedule::append(double omega, double interval) {
  if (!(interval > 0.0)) return;
  if (times_.empty()) {
    times_.push_back(0.0);
    omegas_.push_back(omega);
  } else if (omegas_.back() != omega) {
    times_.push_back(duration_);
    omegas_.push_back(omega);
  }
  duration_ += interval;
}

ActuationSchedule ActuationSchedule::negated() const {
  ActuationSchedule out = *this;
  for (auto& w : out.omegas_) w = -w;
  return out;
}

void write_schedule_csv(std::ostream& out, const ActuationSchedule& schedule) {
  out << std::setprecision(12);
  out << "# duration_s: " << schedule.duration() << '\n';
  out << "t_switch_s,omega_rad_s\n";
  for (std::size_t i = 0; i < schedule.size(); ++i)
    out << schedule.switch_times()[i] << ',' << schedule.omegas()[i] << '\n';
}

ActuationSchedule read_schedule_csv(std::istream& in) {
  std::string line;
  double duration = -1.0;
  bool header = false;
  std::vector<double> times, omegas;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("duration_s:");
      if (pos != std::string::npos) duration = std::stod(line.substr(pos + 11));
      continue;
    }
    if (!header) {
      if (line != "t_switch_s,omega_rad_s")
        throw ConfigError("header", line_no, "schedule header must be 't_switch_s,omega_rad_s'");
      header = true;
      continue;
    }
    std::istringstream row(line);
    double t = 0.0, w = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> w) || comma != ',')
      throw ConfigError("row", line_no, "line " + std::to_string(line_no) + ": malformed schedule row");
    times.push_back(t);
    omegas.push_back(w);
  }
  if (duration < 0.0) throw ConfigError("duration_s", 0, "schedule is missing the '# duration_s:' line");
  return ActuationSchedule(std::move(times), std::move(omegas), duration);
}

ActuationSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("schedule", 0, "cannot open schedule file '" + path + "'");
  return read_schedule_csv(in);
}

// ------------------------------------------------------------------ masses

VectorXd lumped_masses(const RobotConfig& config, const Topology& topology) {
  VectorXd m(topology.ndof());
  const double head_node = config.head_mass / 3.0;
  for (int i = 0; i < topology.num_nodes; ++i) {
    const double mass = topology.node_segment[i] == Segment::tail ? config.rho_line * topology.node_voronoi[i] : head_node;
    m.segment<3>(3 * i).setConstant(mass);
  }
  const double r0sq = config.tail_radius * config.tail_radius;
  for (int e = 0; e < topology.num_edges; ++e) {
    const auto& edge = topology.edges[e];
    double inertia = 0.0;
    if (edge.segment == Segment::head)
      inertia = 0.5 * (0.5 * config.head_mass) * config.head_radius * config.head_radius;
    else
      inertia = 0.5 * config.rho_line * edge.rest_length * r0sq;
    m[topology.theta_index(e)] = inertia;
  }
  return m;
}

void apply_actuation(RobotState& state, const Topology& topology, double omega, double dt) {
  state.natural_twist[topology.motor_stencil] += omega * dt;
}

// -------------------------------------------------------------- integrator

struct Integrator::Workspace {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> solver;
  bool analyzed = false;
};

Integrator::Integrator(RobotConfig config, const Topology& topology)
    : config_(std::move(config)),
      topology_(&topology),
      stiffness_(make_stiffness(config_, topology)),
      masses_(lumped_masses(config_, topology)),
      work_(std::make_unique<Workspace>()) {}

Integrator::~Integrator() = default;
Integrator::Integrator(Integrator&&) noexcept = default;

bool Integrator::try_step(RobotState& state, double omega, double dt, StepStats& stats) {
  const Topology& topo = *topology_;
  const VectorXd q_start = state.q;
  const VectorXd v_start = state.qdot;
  std::vector<double> natural_twist = state.natural_twist;
  natural_twist[topo.motor_stencil] += omega * dt;
  const RodReference ref{state.ref_frames, state.ref_twist, state.natural_curvature, natural_twist};

  const double tol = config_.newton_tol * config_.force_scale();
  const VectorXd inertia = masses_ / (dt * dt);
  VectorXd q = q_start + dt * v_start;

  VectorXd hold = VectorXd::Zero(q.size());
  if (config_.interface_hold > 0.0) {
    const double l = config_.tail_length;
    for (int n : topo.head_nodes) hold[3 * n + 1] = config_.interface_hold * config_.bending_stiffness() / (l * l * l);
  }

  SparseMatrix mass_matrix(q.size(), q.size());
  {
    std::vector<Eigen::Triplet<double>> diag;
    for (int i = 0; i < q.size(); ++i) diag.emplace_back(i, i, inertia[i] + hold[i]);
    mass_matrix.setFromTriplets(diag.begin(), diag.end());
  }

  try {
    for (int iter = 0; iter <= config_.newton_max_iter; ++iter) {
      const VectorXd v = (q - q_start) / dt;
      const auto elastic = total_elastic(q, topo, stiffness_, ref, false);
      const auto hydro = assemble_hydro_forces(q, v, topo, config_, false);
      const VectorXd residual =
          inertia.cwiseProduct(q - q_start - dt * v_start) + hold.cwiseProduct(q) - elastic.force - hydro.force;
      const double norm = residual.lpNorm<Eigen::Infinity>();
      stats.residual = norm;
      log().trace("newton t={} iter={} residual={:.3e}", state.time, iter, norm);
      if (!std::isfinite(norm)) return false;
      if (norm < tol) {
        stats.newton_iterations += iter;
        state.natural_twist = std::move(natural_twist);
        state.qdot = v;
        state.q = q;
        update_frames(state, topo);
        state.time += dt;
        return true;
      }
      if (iter == config_.newton_max_iter) break;

      const auto full = total_elastic(q, topo, stiffness_, ref, true);
      const auto drag = assemble_hydro_forces(q, v, topo, config_, true);
      SparseMatrix jacobian = mass_matrix + full.hessian - drag.velocity_jacobian / dt;
      jacobian.makeCompressed();
      if (!work_->analyzed) {
        work_->solver.analyzePattern(jacobian);
        work_->analyzed = true;
      }
      work_->solver.factorize(jacobian);
      if (work_->solver.info() != Eigen::Success) return false;
      const VectorXd delta = work_->solver.solve(-residual);
      if (!delta.allFinite()) return false;
      q += delta;
    }
  } catch (const GeometryError& e) {
    log().debug("newton step rejected at t={}: {}", state.time, e.what());
    return false;
  }
  return false;
}

StepStats Integrator::step_recursive(RobotState& state, double omega, double dt, int depth) {
  StepStats stats;
  if (try_step(state, omega, dt, stats)) return stats;
  if (depth >= 4) {
    std::ostringstream msg;
    msg << "Newton iteration failed at t = " << state.time << " s (dt = " << dt
        << " s, residual = " << stats.residual << ") after 4 step halvings";
    throw SolverError(state.time, state.q, msg.str());
  }
  log().info("halving step at t={} (dt={})", state.time, dt);
  auto a = step_recursive(state, omega, 0.5 * dt, depth + 1);
  auto b = step_recursive(state, omega, 0.5 * dt, depth + 1);
  return {a.newton_iterations + b.newton_iterations, 1 + a.halvings + b.halvings, b.residual};
}

StepStats Integrator::step(RobotState& state, double omega, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt_s", 0, "time step must be positive");
  return step_recursive(state, omega, dt, 0);
}

RobotState step(RobotState state, const Topology& topology, const RobotConfig& config, double omega, double dt) {
  Integrator integrator(config, topology);
  integrator.step(state, omega, dt);
  return state;
}

// --------------------------------------------------------------- simulate

Trajectory simulate(const RobotConfig& config, const ActuationSchedule& schedule, const SimulationOptions& options) {
  auto [state, topo] = build_robot(config);
  if (options.initial_yaw != 0.0) rotate_about_vertical(state, topo, options.initial_yaw);
  Integrator integrator(config, topo);
  if (options.mass_scale != 1.0) integrator.scale_masses(options.mass_scale);
  if (options.tail_stiffness_scale != 1.0) {
    const StiffnessSet scaled = make_stiffness(config, topo, options.tail_stiffness_scale);
    integrator.stiffness().bend = scaled.bend;
    integrator.stiffness().twist = scaled.twist;
  }

  Trajectory traj;
  const int th0 = topo.theta_index(0);
  const int th1 = topo.theta_index(1);
  const double y0 = state.node(topo.head_nodes[1]).y();
  int sample_count = 0;
  auto record = [&](double omega_h, double omega_t, double omega) {
    traj.time.push_back(state.time);
    traj.head_position.push_back(state.node(topo.head_nodes[1]));
    traj.head_axis.push_back(state.ref_frames[0].t);
    traj.omega_h.push_back(omega_h);
    traj.omega_t.push_back(omega_t);
    traj.omega_motor.push_back(omega);
    if (options.snapshot_stride > 0 && sample_count % options.snapshot_stride == 0)
      traj.snapshots.push_back({state.time, state.q, state.qdot});
    ++sample_count;
    if (!traj.vertical_drift_exceeded && std::abs(traj.head_position.back().y() - y0) > 0.05 * config.head_radius) {
      traj.vertical_drift_exceeded = true;
      log().warn("head left the interface plane by more than 0.05 R at t = {} s", state.time);
    }
  };

  record(0.0, 0.0, schedule.size() ? schedule.omegas()[0] : 0.0);
  const double dt = config.time_step();
  double next_sample = options.output_stride > 0.0 ? options.output_stride : 0.0;

  for (std::size_t seg = 0; seg < schedule.size(); ++seg) {
    const double start = schedule.switch_times()[seg];
    const double end = schedule.segment_end(seg);
    const double omega = schedule.omegas()[seg];
    const auto steps = static_cast<long>(std::max(1.0, std::ceil((end - start) / dt - 1e-9)));
    const double h = (end - start) / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      const double a0 = state.q[th0];
      const double a1 = state.q[th1];
      try {
        integrator.step(state, omega, h);
      } catch (const SolverError& e) {
        throw SolverError(state.time, e.dump(), std::string("simulation failed: ") + e.what());
      }
      state.time = start + static_cast<double>(k + 1) * h;
      const bool last = seg + 1 == schedule.size() && k + 1 == steps;
      if (state.time >= next_sample - 1e-12 * std::max(1.0, next_sample) || last) {
        record((state.q[th0] - a0) / h, (state.q[th1] - a1) / h, omega);
        if (options.output_stride > 0.0)
          while (next_sample <= state.time + 1e-12 * std::max(1.0, next_sample)) next_sample += options.output_stride;
      }
    }
  }
  return traj;
}

// -------------------------------------------------------------------- I/O

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,z,ax,ay,az,omega_h,omega_t,omega_motor\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& p = traj.head_position[i];
    const auto& a = traj.head_axis[i];
    out << traj.time[i] << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << a.x() << ',' << a.y() << ','
        << a.z() << ',' << traj.omega_h[i] << ',' << traj.omega_t[i] << ',' << traj.omega_motor[i] << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,y,z,ax,ay,az,omega_h,omega_t,omega_motor", 0) != 0)
    throw ConfigError("header", 1, "unexpected trajectory header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, 10> v{};
    std::istringstream row(line);
    for (int i = 0; i < 10; ++i) {
      if (!(row >> v[i])) throw ConfigError("row", line_no, "malformed trajectory row " + std::to_string(line_no));
      if (i < 9) row.ignore(1, ',');
    }
    traj.time.push_back(v[0]);
    traj.head_position.emplace_back(v[1], v[2], v[3]);
    traj.head_axis.emplace_back(v[4], v[5], v[6]);
    traj.omega_h.push_back(v[7]);
    traj.omega_t.push_back(v[8]);
    traj.omega_motor.push_back(v[9]);
  }
  return traj;
}

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian host");

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw Error("truncated snapshot record");
  return value;
}

}  // namespace

void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots) {
  for (const auto& s : snapshots) {
    const auto ndof = static_cast<std::uint32_t>(s.q.size());
    const auto bytes = static_cast<std::uint32_t>(sizeof(double) + sizeof(std::uint32_t) + 2 * ndof * sizeof(double));
    put(out, bytes);
    put(out, s.time);
    put(out, ndof);
    out.write(reinterpret_cast<const char*>(s.q.data()), ndof * sizeof(double));
    out.write(reinterpret_cast<const char*>(s.qdot.data()), ndof * sizeof(double));
  }
}

std::vector<Snapshot> read_snapshots(std::istream& in) {
  std::vector<Snapshot> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto bytes = get<std::uint32_t>(in);
    Snapshot s;
    s.time = get<double>(in);
    const auto ndof = get<std::uint32_t>(in);
    if (bytes != sizeof(double) + sizeof(std::uint32_t) + 2 * ndof * sizeof(double))
      throw Error("snapshot record length mismatch");
    s.q.resize(ndof);
    s.qdot.resize(ndof);
    if (!in.read(reinterpret_cast<char*>(s.q.data()), ndof * sizeof(double)) ||
        !in.read(reinterpret_cast<char*>(s.qdot.data()), ndof * sizeof(double)))
      throw Error("truncated snapshot record");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace flagsim
