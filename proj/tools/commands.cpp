#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "flagsim/analysis.hpp"
#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"
#include "flagsim/error.hpp"
#include "flagsim/planner.hpp"
#include "manifest.hpp"
#include "sweep.hpp"

namespace flagsim::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what, 0, std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw ConfigError("out", 0, "--out is required");
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("out", 0, "cannot create output directory '" + out + "'");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_path_csv(const fs::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t_s,u_m,w_m\n" << std::setprecision(12);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec2 p = horizontal(traj.head_position[i]);
    out << traj.time[i] << ',' << p.x() << ',' << p.y() << '\n';
  }
}

template <class T, class Writer>
std::string to_text(const T& value, Writer&& writer) {
  std::ostringstream out;
  writer(out, value);
  return out.str();
}

double resolve_omega(const RobotConfig& config, double omega, double omega_bar) {
  return omega_bar != 0.0 ? omega_bar / config.time_scale() : omega;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what();
    if (!e.field().empty()) std::cerr << " [field: " << e.field() << "]";
    std::cerr << '\n';
    return kBadInput;
  } catch (const PlanError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const SolverError& e) {
    std::cerr << "solver failure at t = " << e.time() << " s: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
  return guarded([&] {
    const auto t0 = Clock::now();
    const RobotConfig config = load_config(args.config);
    const ActuationSchedule schedule = load_schedule(args.schedule);
    const fs::path dir = prepare_out(args.out);

    SimulationOptions options;
    options.output_stride = args.stride > 0.0 ? args.stride : 0.01 * config.time_scale();
    options.snapshot_stride = args.snapshot_stride;
    const Trajectory traj = simulate(config, schedule, options);

    RunManifest manifest("simulate", dir);
    manifest.add_input("config", serialize_config(config));
    manifest.add_input("schedule", to_text(schedule, write_schedule_csv));
    {
      auto out = open_out(dir / "trajectory.csv");
      write_trajectory_csv(out, traj);
    }
    manifest.add_output("trajectory.csv");
    write_path_csv(dir / "path.csv", traj);
    manifest.add_output("path.csv");
    if (!traj.snapshots.empty()) {
      std::ofstream out(dir / "snapshots.bin", std::ios::binary);
      write_snapshots(out, traj.snapshots);
      manifest.add_output("snapshots.bin");
    }
    manifest.set_simulated_seconds(schedule.duration());
    manifest.set_wall_seconds(seconds_since(t0));
    manifest.write();
    std::cout << "simulated " << schedule.duration() << " s, " << traj.size() << " samples -> " << dir.string()
              << '\n';
    if (traj.vertical_drift_exceeded) std::cout << "warning: head left the interface plane by more than 0.05 R\n";
    return int(kOk);
  });
}

int cmd_characterize(const CharacterizeArgs& args) {
  return guarded([&] {
    const auto t0 = Clock::now();
    const RobotConfig config = load_config(args.config);
    const double omega = resolve_omega(config, args.omega, args.omega_bar);
    if (omega == 0.0 || !std::isfinite(omega)) throw PlanError("omega_H = 0 defines no motion primitive");
    const fs::path dir = prepare_out(args.out);

    CharacterizeOptions options;
    options.duration_time_scales = args.duration_time_scales;
    options.switching_periods = args.switching_periods;
    const MotionPrimitiveMap map = characterize(config, omega, options);

    RunManifest manifest("characterize", dir);
    manifest.add_input("config", serialize_config(config));
    std::ostringstream request;
    request << std::setprecision(17) << "omega_H_rad_s = " << omega
            << "\nduration_time_scales = " << options.duration_time_scales
            << "\nswitching_periods = " << options.switching_periods << '\n';
    manifest.add_input("request", request.str());
    {
      auto out = open_out(dir / "map.txt");
      write_primitive_map(out, map);
    }
    manifest.add_output("map.txt");
    manifest.set_simulated_seconds(options.duration_time_scales * config.time_scale());
    manifest.set_wall_seconds(seconds_since(t0));
    manifest.write();
    write_primitive_map(std::cout, map);
    return int(kOk);
  });
}

int cmd_calibrate(const CalibrateArgs& args) {
  return guarded([&] {
    const auto t0 = Clock::now();
    const RobotConfig base = load_config(args.config);
    const auto measurements = load_measurements(args.measurements);
    std::vector<Measurement> validation;
    if (!args.validation.empty()) validation = load_measurements(args.validation);
    const fs::path dir = prepare_out(args.out);

    CalibrationOptions options;
    options.jobs = args.jobs;
    options.seed_grid = args.seed_grid;
    options.max_evaluations = args.max_evaluations;
    options.step_time_scales = args.step_time_scales;
    options.duration_time_scales = args.duration_time_scales;
    const CalibrationResult result = calibrate(measurements, base, options);

    RunManifest manifest("calibrate", dir);
    manifest.add_input("config", serialize_config(base));
    manifest.add_input("measurements", to_text(measurements, write_measurements_csv));
    std::ostringstream numerics;
    numerics << std::setprecision(17) << "seed_grid = " << options.seed_grid
             << "\nmax_evaluations = " << options.max_evaluations
             << "\nstep_time_scales = " << options.step_time_scales
             << "\nduration_time_scales = " << options.duration_time_scales << '\n';
    manifest.add_input("numerics", numerics.str());
    {
      auto out = open_out(dir / "report.txt");
      write_calibration_report(out, result);
    }
    manifest.add_output("report.txt");

    RobotConfig fitted = base;
    fitted.c_t = result.coefficients[0];
    fitted.c_r = result.coefficients[1];
    fitted.c_yr = result.coefficients[2];
    {
      auto out = open_out(dir / "fitted.cfg");
      out << serialize_config(fitted);
    }
    manifest.add_output("fitted.cfg");

    if (!validation.empty()) {
      manifest.add_input("validation", to_text(validation, write_measurements_csv));
      const FitEvaluation check = evaluate_fit(validation, base, result.coefficients, options);
      auto out = open_out(dir / "validation.txt");
      out << std::setprecision(10) << "fit_error: " << result.fit_error << "\nvalidation_error: " << check.error
          << "\nratio: " << check.error / result.fit_error << '\n';
      for (const auto& r : check.residuals)
        out << r.measured.tails << ',' << r.measured.tail_length << ',' << r.error_h << ',' << r.error_yr
            << (r.failure.empty() ? "" : "," + r.failure) << '\n';
      manifest.add_output("validation.txt");
      std::cout << "validation_error: " << check.error << '\n';
    }
    manifest.set_wall_seconds(seconds_since(t0));
    manifest.write();
    write_calibration_report(std::cout, result);
    return int(kOk);
  });
}

int cmd_plan(const PlanArgs& args) {
  return guarded([&] {
    const auto t0 = Clock::now();
    const RobotConfig config = load_config(args.config);
    const PathSpec spec = load_path_spec(args.path_spec);
    MotionPrimitiveMap map;
    if (!args.map.empty()) {
      map = load_primitive_map(args.map);
    } else {
      const double omega = resolve_omega(config, args.omega, args.omega_bar);
      if (omega == 0.0 || !std::isfinite(omega))
        throw PlanError("plan needs a non-zero --omega or --omega-bar, or a --map file");
      map = characterize(config, omega);
    }
    const Plan plan = plan_path(map, spec);
    const fs::path dir = prepare_out(args.out);

    RunManifest manifest("plan", dir);
    manifest.add_input("config", serialize_config(config));
    manifest.add_input("path_spec", serialize_path_spec(spec));
    manifest.add_input("map", to_text(map, write_primitive_map));
    {
      auto out = open_out(dir / "map.txt");
      write_primitive_map(out, map);
    }
    manifest.add_output("map.txt");
    {
      auto out = open_out(dir / "schedule.csv");
      write_schedule_csv(out, plan.schedule);
    }
    manifest.add_output("schedule.csv");
    {
      auto out = open_out(dir / "waypoints.csv");
      out << "t_s,u_m,w_m\n" << std::setprecision(12);
      for (const auto& w : plan.waypoints) out << w.t << ',' << w.p.x() << ',' << w.p.y() << '\n';
    }
    manifest.add_output("waypoints.csv");

    std::ostringstream summary;
    summary << std::setprecision(10) << "duration_s: " << plan.schedule.duration()
            << "\nswitches: " << plan.schedule.size() << "\ninitial_yaw_rad: " << plan.initial_yaw
            << "\nhalf_period_s: " << plan.half_period << '\n';
    if (spec.variant == PathSpec::Variant::circle)
      summary << "theta_arc_rad: " << plan.theta_arc << "\ndelta_theta_rad: " << plan.delta_theta
              << "\ncircle_center_m: " << plan.circle_center.x() << ", " << plan.circle_center.y()
              << "\ncircle_radius_m: " << plan.circle_radius << '\n';

    if (args.verify) {
      const double stride = args.stride > 0.0 ? args.stride : 0.25 * plan.half_period;
      const Trajectory traj = execute_plan(config, plan, stride);
      const PlanAudit audit = audit_plan(plan, traj);
      {
        auto out = open_out(dir / "trajectory.csv");
        write_trajectory_csv(out, traj);
      }
      manifest.add_output("trajectory.csv");
      write_path_csv(dir / "path.csv", traj);
      manifest.add_output("path.csv");
      {
        auto out = open_out(dir / "executed_waypoints.csv");
        out << "t_s,planned_u_m,planned_w_m,executed_u_m,executed_w_m,error_m\n" << std::setprecision(12);
        for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
          const auto& w = plan.waypoints[i];
          const Vec2& e = audit.executed[i];
          out << w.t << ',' << w.p.x() << ',' << w.p.y() << ',' << e.x() << ',' << e.y() << ','
              << (e - w.p).norm() << '\n';
        }
      }
      manifest.add_output("executed_waypoints.csv");

      summary << "closure_m: " << audit.closure << "\nmax_waypoint_error_m: " << audit.max_error
              << "\nrms_waypoint_error_m: " << audit.rms_error << '\n';
      if (spec.variant == PathSpec::Variant::polygon && spec.closed) {
        double perimeter = 0.0;
        for (std::size_t i = 0; i < spec.vertices.size(); ++i)
          perimeter += (spec.vertices[(i + 1) % spec.vertices.size()] - spec.vertices[i]).norm();
        summary << "closure_over_mean_edge: " << audit.closure / (perimeter / spec.vertices.size()) << '\n';
      }
      if (spec.variant == PathSpec::Variant::circle)
        summary << "radial_rms_m: " << audit.radial_rms << "\nradial_rms_over_radius: " << audit.radial_rms / spec.radius
                << '\n';
      manifest.set_simulated_seconds(plan.schedule.duration());
    }
    {
      auto out = open_out(dir / "plan.txt");
      out << summary.str();
    }
    manifest.add_output("plan.txt");
    manifest.set_wall_seconds(seconds_since(t0));
    manifest.write();
    std::cout << summary.str();
    return int(kOk);
  });
}

int cmd_sweep(const SweepArgs& args) {
  return guarded([&] {
    const auto t0 = Clock::now();
    const RobotConfig base = load_config(args.config);
    const SweepSpec spec = parse_sweep_spec(read_text(args.sweep, "sweep spec"));
    for (std::size_t i = 0; i < spec.points(); ++i) sweep_point(base, spec, i);
    const fs::path dir = prepare_out(args.out);

    SweepOptions options;
    options.jobs = args.jobs;
    options.duration_time_scales = args.duration_time_scales;
    {
      auto out = open_out(dir / "summary.csv");
      run_sweep(out, base, spec, options);
    }
    RunManifest manifest("sweep", dir);
    manifest.add_input("config", serialize_config(base));
    manifest.add_input("sweep", serialize_sweep_spec(spec));
    manifest.add_output("summary.csv");
    manifest.set_wall_seconds(seconds_since(t0));
    manifest.write();
    std::cout << spec.points() << " sweep points -> " << (dir / "summary.csv").string() << '\n';
    return int(kOk);
  });
}

}  // namespace flagsim::cli
