#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "flagsim/analysis.hpp"
#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"
#include "flagsim/error.hpp"
#include "flagsim/hydro.hpp"
#include "flagsim/planner.hpp"

namespace py = pybind11;
using namespace flagsim;

namespace {

Eigen::MatrixXd stack(const std::vector<Vec3>& rows) {
  Eigen::MatrixXd m(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

Eigen::MatrixXd stack(const std::vector<Vec2>& rows) {
  Eigen::MatrixXd m(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

template <class T, class Writer>
std::string to_text(const T& value, Writer&& writer) {
  std::ostringstream out;
  writer(out, value);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_flagsim, m) {
  m.doc() = "Flagellated soft-robot simulator: DER tails, RFT hydrodynamics, calibration and planning";

  auto base_error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base_error.ptr());
  py::register_exception<SolverError>(m, "SolverError", base_error.ptr());
  py::register_exception<FitError>(m, "FitError", base_error.ptr());
  py::register_exception<SteadyStateError>(m, "SteadyStateError", base_error.ptr());
  py::register_exception<CalibrationError>(m, "CalibrationError", base_error.ptr());
  py::register_exception<PlanError>(m, "PlanError", base_error.ptr());

  py::class_<RobotConfig>(m, "RobotConfig")
      .def(py::init<>())
      .def_readwrite("tails", &RobotConfig::tails)
      .def_readwrite("tail_length", &RobotConfig::tail_length)
      .def_readwrite("tail_radius", &RobotConfig::tail_radius)
      .def_readwrite("head_radius", &RobotConfig::head_radius)
      .def_readwrite("head_length", &RobotConfig::head_length)
      .def_readwrite("spoke_length", &RobotConfig::spoke_length)
      .def_readwrite("youngs_modulus", &RobotConfig::youngs_modulus)
      .def_readwrite("shear_modulus", &RobotConfig::shear_modulus)
      .def_readwrite("mu0", &RobotConfig::mu0)
      .def_readwrite("c_t", &RobotConfig::c_t)
      .def_readwrite("c_r", &RobotConfig::c_r)
      .def_readwrite("c_yr", &RobotConfig::c_yr)
      .def_readwrite("interface_h", &RobotConfig::interface_h)
      .def_readwrite("interface_k", &RobotConfig::interface_k)
      .def_readwrite("nodes_per_tail", &RobotConfig::nodes_per_tail)
      .def_readwrite("dt", &RobotConfig::dt)
      .def_readwrite("rigid_multiplier", &RobotConfig::rigid_multiplier)
      .def_readwrite("rho_line", &RobotConfig::rho_line)
      .def_readwrite("head_mass", &RobotConfig::head_mass)
      .def_readwrite("interface_hold", &RobotConfig::interface_hold)
      .def_readwrite("newton_tol", &RobotConfig::newton_tol)
      .def_readwrite("newton_max_iter", &RobotConfig::newton_max_iter)
      .def("validate", &RobotConfig::validate)
      .def("time_scale", &RobotConfig::time_scale)
      .def("time_step", &RobotConfig::time_step)
      .def("bending_stiffness", &RobotConfig::bending_stiffness)
      .def("serialize", [](const RobotConfig& c) { return serialize_config(c); });

  m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<ActuationSchedule>(m, "ActuationSchedule")
      .def(py::init<>())
      .def(py::init<std::vector<double>, std::vector<double>, double>(), py::arg("switch_times"), py::arg("omegas"),
           py::arg("duration"))
      .def_static("constant", &ActuationSchedule::constant, py::arg("omega"), py::arg("duration"))
      .def("append", &ActuationSchedule::append, py::arg("omega"), py::arg("interval"))
      .def("omega_at", &ActuationSchedule::omega_at, py::arg("t"))
      .def("negated", &ActuationSchedule::negated)
      .def_property_readonly("duration", &ActuationSchedule::duration)
      .def_property_readonly("switch_times", &ActuationSchedule::switch_times)
      .def_property_readonly("omegas", &ActuationSchedule::omegas)
      .def("to_csv", [](const ActuationSchedule& s) { return to_text(s, write_schedule_csv); });

  py::class_<SimulationOptions>(m, "SimulationOptions")
      .def(py::init<>())
      .def_readwrite("output_stride", &SimulationOptions::output_stride)
      .def_readwrite("snapshot_stride", &SimulationOptions::snapshot_stride)
      .def_readwrite("mass_scale", &SimulationOptions::mass_scale)
      .def_readwrite("tail_stiffness_scale", &SimulationOptions::tail_stiffness_scale)
      .def_readwrite("initial_yaw", &SimulationOptions::initial_yaw);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("time", [](const Trajectory& t) { return t.time; })
      .def_property_readonly("head_position", [](const Trajectory& t) { return stack(t.head_position); })
      .def_property_readonly("head_axis", [](const Trajectory& t) { return stack(t.head_axis); })
      .def_property_readonly("omega_h", [](const Trajectory& t) { return t.omega_h; })
      .def_property_readonly("omega_t", [](const Trajectory& t) { return t.omega_t; })
      .def_property_readonly("omega_motor", [](const Trajectory& t) { return t.omega_motor; })
      .def_readonly("vertical_drift_exceeded", &Trajectory::vertical_drift_exceeded)
      .def("__len__", &Trajectory::size)
      .def("to_csv", [](const Trajectory& t) { return to_text(t, write_trajectory_csv); });

  m.def("simulate", &simulate, py::arg("config"), py::arg("schedule"), py::arg("options") = SimulationOptions{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<CircleFit>(m, "CircleFit")
      .def_readonly("center", &CircleFit::center)
      .def_readonly("radius", &CircleFit::radius)
      .def_readonly("residual", &CircleFit::residual);
  m.def(
      "fit_circle",
      [](const Eigen::MatrixXd& points) {
        std::vector<Vec2> pts;
        for (Eigen::Index i = 0; i < points.rows(); ++i) pts.emplace_back(points(i, 0), points(i, 1));
        return fit_circle(pts);
      },
      py::arg("points"));

  py::class_<TimeWindow>(m, "TimeWindow")
      .def(py::init<>())
      .def(py::init([](double b, double e) { return TimeWindow{b, e}; }), py::arg("begin"), py::arg("end"))
      .def_readwrite("begin", &TimeWindow::begin)
      .def_readwrite("end", &TimeWindow::end);

  py::class_<SteadyStateSummary>(m, "SteadyStateSummary")
      .def_readonly("omega_h", &SteadyStateSummary::omega_h)
      .def_readonly("omega_t", &SteadyStateSummary::omega_t)
      .def_readonly("omega_yr", &SteadyStateSummary::omega_yr)
      .def_readonly("R_yr", &SteadyStateSummary::R_yr)
      .def_readonly("theta_heading", &SteadyStateSummary::theta_heading)
      .def_readonly("heading_signed", &SteadyStateSummary::heading_signed)
      .def_readonly("circle_center", &SteadyStateSummary::circle_center)
      .def_readonly("fit_residual", &SteadyStateSummary::fit_residual)
      .def_readonly("path_speed", &SteadyStateSummary::path_speed)
      .def_readonly("axial_speed", &SteadyStateSummary::axial_speed);
  m.def("summarize_steady", &summarize_steady, py::arg("trajectory"), py::arg("window") = TimeWindow{});
  m.def("time_scale", [](const RobotConfig& c) { return nondimensionalize(c).time_scale; }, py::arg("config"));

  m.def("rft_parallel", &rft_parallel, py::arg("mu0"), py::arg("slenderness"));
  m.def("rft_perpendicular", &rft_perpendicular, py::arg("mu0"), py::arg("slenderness"));
  m.def(
      "lateral_constant",
      [](double h_over_R, double k) {
        InterfaceProfile p{h_over_R, k, 1.0, 1.0};
        const auto c = lateral_constant_oracle(p);
        return py::make_tuple(c.lateral, c.vertical);
      },
      py::arg("h_over_R") = 0.7, py::arg("k") = 20.0,
      "(lateral, vertical) constants for a unit cylinder in the sigmoid interface profile");

  py::class_<Measurement>(m, "Measurement")
      .def(py::init([](int n, double l, double w, double wh, double wyr) { return Measurement{n, l, w, wh, wyr}; }),
           py::arg("tails"), py::arg("tail_length"), py::arg("omega_motor"), py::arg("omega_h") = 0.0,
           py::arg("omega_yr") = 0.0)
      .def_readwrite("tails", &Measurement::tails)
      .def_readwrite("tail_length", &Measurement::tail_length)
      .def_readwrite("omega_motor", &Measurement::omega_motor)
      .def_readwrite("omega_h", &Measurement::omega_h)
      .def_readwrite("omega_yr", &Measurement::omega_yr);
  m.def("load_measurements", &load_measurements, py::arg("path"));

  m.def(
      "measurements_to_csv",
      [](const std::vector<Measurement>& ms) { return to_text(ms, write_measurements_csv); }, py::arg("measurements"));

  py::class_<CalibrationOptions>(m, "CalibrationOptions")
      .def(py::init<>())
      .def_readwrite("seed_grid", &CalibrationOptions::seed_grid)
      .def_readwrite("lower", &CalibrationOptions::lower)
      .def_readwrite("upper", &CalibrationOptions::upper)
      .def_readwrite("jobs", &CalibrationOptions::jobs)
      .def_readwrite("max_evaluations", &CalibrationOptions::max_evaluations)
      .def_readwrite("duration_time_scales", &CalibrationOptions::duration_time_scales)
      .def_readwrite("step_time_scales", &CalibrationOptions::step_time_scales)
      .def_readwrite("max_step_angle", &CalibrationOptions::max_step_angle);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("coefficients", &CalibrationResult::coefficients)
      .def_readonly("fit_error", &CalibrationResult::fit_error)
      .def_readonly("evaluations", &CalibrationResult::evaluations)
      .def_readonly("sensitivity", &CalibrationResult::sensitivity);

  m.def("synthesize_measurements", &synthesize_measurements, py::arg("base"), py::arg("sites"),
        py::arg("options") = CalibrationOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def(
      "evaluate_fit",
      [](const std::vector<Measurement>& ms, const RobotConfig& base, const std::array<double, 3>& c,
         const CalibrationOptions& o) { return evaluate_fit(ms, base, c, o).error; },
      py::arg("measurements"), py::arg("base"), py::arg("coefficients"), py::arg("options") = CalibrationOptions{},
      py::call_guard<py::gil_scoped_release>());
  m.def("calibrate", &calibrate, py::arg("measurements"), py::arg("base"), py::arg("options") = CalibrationOptions{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<MotionPrimitiveMap>(m, "MotionPrimitiveMap")
      .def(py::init<>())
      .def_readwrite("omega_H", &MotionPrimitiveMap::omega_H)
      .def_readwrite("omega_yr", &MotionPrimitiveMap::omega_yr)
      .def_readwrite("R_yr", &MotionPrimitiveMap::R_yr)
      .def_readwrite("theta_heading", &MotionPrimitiveMap::theta_heading)
      .def_readwrite("heading_signed", &MotionPrimitiveMap::heading_signed)
      .def_readwrite("path_speed", &MotionPrimitiveMap::path_speed)
      .def_readwrite("tail_length", &MotionPrimitiveMap::tail_length)
      .def_readwrite("switch_lag", &MotionPrimitiveMap::switch_lag)
      .def_readwrite("switch_kick", &MotionPrimitiveMap::switch_kick)
      .def("to_text", [](const MotionPrimitiveMap& map) { return to_text(map, write_primitive_map); });
  m.def("parse_primitive_map", [](const std::string& text) { return parse_primitive_map(text); }, py::arg("text"));

  py::class_<CharacterizeOptions>(m, "CharacterizeOptions")
      .def(py::init<>())
      .def_readwrite("duration_time_scales", &CharacterizeOptions::duration_time_scales)
      .def_readwrite("switching_periods", &CharacterizeOptions::switching_periods);
  m.def("characterize", &characterize, py::arg("config"), py::arg("omega_H"),
        py::arg("options") = CharacterizeOptions{}, py::call_guard<py::gil_scoped_release>());

  py::class_<Waypoint>(m, "Waypoint").def_readonly("t", &Waypoint::t).def_readonly("p", &Waypoint::p);
  py::class_<Plan>(m, "Plan")
      .def_readonly("schedule", &Plan::schedule)
      .def_readonly("initial_yaw", &Plan::initial_yaw)
      .def_readonly("half_period", &Plan::half_period)
      .def_readonly("waypoints", &Plan::waypoints)
      .def_readonly("circle_center", &Plan::circle_center)
      .def_readonly("circle_radius", &Plan::circle_radius)
      .def_readonly("theta_arc", &Plan::theta_arc)
      .def_readonly("delta_theta", &Plan::delta_theta);
  m.def("plan_line", &plan_line, py::arg("map"), py::arg("length"), py::arg("T") = 0.0);
  m.def("plan_circle", &plan_circle, py::arg("map"), py::arg("radius"), py::arg("turns") = 1.0,
        py::arg("delta_theta") = 0.0);
  m.def(
      "plan_polygon",
      [](const MotionPrimitiveMap& map, const Eigen::MatrixXd& vertices, bool closed, double T) {
        std::vector<Vec2> v;
        for (Eigen::Index i = 0; i < vertices.rows(); ++i) v.emplace_back(vertices(i, 0), vertices(i, 1));
        return plan_polygon(map, v, closed, T);
      },
      py::arg("map"), py::arg("vertices"), py::arg("closed") = true, py::arg("T") = 0.0);
  m.def("plan_from_spec", [](const MotionPrimitiveMap& map, const std::string& text) {
    return plan_path(map, parse_path_spec(text));
  }, py::arg("map"), py::arg("path_spec"));

  py::class_<PlanAudit>(m, "PlanAudit")
      .def_property_readonly("executed", [](const PlanAudit& a) { return stack(a.executed); })
      .def_readonly("max_error", &PlanAudit::max_error)
      .def_readonly("rms_error", &PlanAudit::rms_error)
      .def_readonly("closure", &PlanAudit::closure)
      .def_readonly("radial_rms", &PlanAudit::radial_rms);
  m.def("execute_plan", &execute_plan, py::arg("config"), py::arg("plan"), py::arg("output_stride"),
        py::call_guard<py::gil_scoped_release>());
  m.def("audit_plan", &audit_plan, py::arg("plan"), py::arg("trajectory"));
}
