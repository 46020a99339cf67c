// Acceptance checks: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; with no arguments every criterion runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "flagsim/analysis.hpp"
#include "flagsim/config.hpp"
#include "flagsim/dynamics.hpp"
#include "flagsim/elastic.hpp"
#include "flagsim/error.hpp"
#include "flagsim/hydro.hpp"
#include "flagsim/planner.hpp"

using namespace flagsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kRpm = 2.0 * kPi / 60.0;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

RobotConfig coarse_fitted() {
  auto c = preset("fitted_sec2");
  c.nodes_per_tail = 6;
  c.dt = 0.02 * c.time_scale();
  c.interface_hold = 1.0;
  return c;
}

SteadyStateSummary steady_run(const RobotConfig& config, double omega, double duration,
                              const SimulationOptions& base = {}) {
  SimulationOptions o = base;
  o.output_stride = 0.05;
  return summarize_steady(simulate(config, ActuationSchedule::constant(omega, duration), o));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------- criteria

Outcome lateral_constant() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = lateral_constant_oracle({0.7, 20.0, 1.0, 1.0});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = rel(c.lateral, 1.403) < 0.005 && std::abs(c.vertical) < 1e-8 && secs < 1.0;
  return {pass, fmt::format("lateral {:.5f} (target 1.403 +-0.5%), vertical {:.2e}, {:.3f} s", c.lateral,
                            c.vertical, secs)};
}

Outcome time_scale() {
  const double tau = nondimensionalize(preset("control_sec4")).time_scale;
  return {rel(tau, 2.207) < 0.005, fmt::format("tau = {:.5f} s (target 2.207 +-0.5%)", tau)};
}

Outcome rft_coefficients() {
  const double par = rft_parallel(1.0, 34.375);
  const double perp = rft_perpendicular(1.0, 34.375);
  const bool pass = rel(par, 2.0686) < 1e-3 && rel(perp, 3.1125) < 1e-3;
  return {pass, fmt::format("mu_par/mu0 = {:.5f}, mu_perp/mu0 = {:.5f}", par, perp)};
}

Outcome gradient_check() {
  const auto config = preset("fitted_sec2");
  auto [state, topology] = build_robot(config);
  const auto stiffness = make_stiffness(config, topology);
  std::mt19937 rng(20240611);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double edge = config.tail_length / (config.nodes_per_tail - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    RobotState s = state;
    for (auto& k : s.natural_curvature) k = Vec2(noise(rng), noise(rng)) * 2.0;
    for (auto& t : s.natural_twist) t = noise(rng);
    VectorXd q = s.q;
    for (int i = 0; i < 3 * topology.num_nodes; ++i) q[i] += 0.05 * edge * noise(rng);
    for (int e = 0; e < topology.num_edges; ++e) q[topology.theta_index(e)] += 0.2 * noise(rng);
    const auto ref = RodReference::of(s);
    const auto sys = total_elastic(q, topology, stiffness, ref, false);
    const double h = 1e-7 * edge;
    VectorXd fd(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      VectorXd a = q, b = q;
      a[i] += h;
      b[i] -= h;
      fd[i] = -(total_elastic(a, topology, stiffness, ref, false).energy -
                total_elastic(b, topology, stiffness, ref, false).energy) /
              (2 * h);
    }
    worst = std::max(worst, (sys.force - fd).norm() / sys.force.norm());
  }
  return {worst < 1e-5, fmt::format("worst relative error {:.2e} over 100 random states", worst)};
}

Outcome torque_balance() {
  const double omega = 143.66 * kRpm;
  const auto fitted = steady_run(preset("fitted_sec2"), omega, 20.0);
  const auto control = steady_run(preset("control_sec4"), omega, 20.0);
  const double sum_f = std::abs(fitted.omega_h) + std::abs(fitted.omega_t);
  const double sum_c = std::abs(control.omega_h) + std::abs(control.omega_t);
  const double h_rpm = std::abs(fitted.omega_h) / kRpm;
  const double t_rpm = std::abs(fitted.omega_t) / kRpm;
  const bool pass = rel(sum_f, omega) < 0.05 && rel(sum_c, omega) < 0.05 && rel(h_rpm, 63.33) < 0.15 &&
                    rel(t_rpm, 80.33) < 0.15 && fitted.omega_h * fitted.omega_t < 0.0;
  return {pass, fmt::format("fitted: |w_h|+|w_t| = {:.4f} of {:.4f} rad/s, w_h {:.2f} rpm (63.33), w_t {:.2f} rpm "
                            "(80.33); control: {:.4f}",
                            sum_f, omega, h_rpm, t_rpm, sum_c)};
}

Outcome circular_trajectories() {
  const auto config = preset("fitted_sec2");
  const auto plus = steady_run(config, 15.0, 45.0);
  const auto minus = steady_run(config, -15.0, 45.0);
  const double res = std::max(plus.fit_residual / plus.R_yr, minus.fit_residual / minus.R_yr);
  const double dr = rel(minus.R_yr, plus.R_yr);
  const bool mirrored = plus.omega_yr * minus.omega_yr < 0.0 && plus.heading_signed * minus.heading_signed < 0.0;
  const double centers = (plus.circle_center - minus.circle_center).norm();
  const bool pass = res < 0.02 && dr < 0.01 && mirrored;
  return {pass, fmt::format("R_yr {:.5f} / {:.5f} m (diff {:.3f}%), residual {:.3f}% of R, omega_yr {:+.4f} / "
                            "{:+.4f}, centers {:.3f} m apart",
                            plus.R_yr, minus.R_yr, 100 * dr, 100 * res, plus.omega_yr, minus.omega_yr, centers)};
}

// Net straight-line speed under a square wave, measured between period
// boundaries after the first period.
double switching_speed(const RobotConfig& config, const SimulationOptions& options, double T, int periods) {
  ActuationSchedule s;
  for (int k = 0; k < periods; ++k) {
    s.append(15.0, T);
    s.append(-15.0, T);
  }
  SimulationOptions o = options;
  o.output_stride = T / 20.0;
  const auto traj = simulate(config, s, o);
  const Vec2 a = horizontal(position_at(traj, 2.0 * T));
  const Vec2 b = horizontal(position_at(traj, 2.0 * T * periods));
  return (b - a).norm() / (2.0 * T * (periods - 1));
}

Outcome rigid_tails() {
  const auto config = preset("fitted_sec2");
  const double T = 4.0;
  SimulationOptions rigid;
  rigid.tail_stiffness_scale = 1e4;
  const double v_soft = switching_speed(config, {}, T, 5);
  const double v_rigid = switching_speed(config, rigid, T, 5);
  return {v_rigid < 0.05 * v_soft,
          fmt::format("net speed soft {:.3e} m/s, rigid {:.3e} m/s ({:.2f}%)", v_soft, v_rigid,
                      100 * v_rigid / v_soft)};
}

Outcome quasi_static() {
  const auto config = preset("fitted_sec2");
  SimulationOptions light;
  light.mass_scale = 0.1;
  const auto a = steady_run(config, 15.0, 30.0);
  const auto b = steady_run(config, 15.0, 30.0, light);
  const double d = rel(b.omega_yr, a.omega_yr);
  return {d < 0.01, fmt::format("omega_yr {:.6f} vs {:.6f} with masses x0.1 ({:.3f}%)", a.omega_yr, b.omega_yr,
                                100 * d)};
}

Outcome calibration_recovery(const fs::path& data) {
  const auto base = load_config((data / "calibration_base.cfg").string());
  const auto fit_set = load_measurements((data / "measurements" / "fit_N3_N4.csv").string());
  const auto held_out = load_measurements((data / "measurements" / "validation_N2_N5.csv").string());
  CalibrationOptions o;
  o.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  o.step_time_scales = 0.02;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = calibrate(fit_set, base, o);
  const auto check = evaluate_fit(held_out, base, r.coefficients, o);
  const double mins = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  const std::array<double, 3> truth{4.0, 2.06, 6.0};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, rel(r.coefficients[i], truth[i]));
  const bool validated = check.error <= 2.0 * r.fit_error;
  return {worst < 0.05 && validated,
          fmt::format("C = ({:.4f}, {:.4f}, {:.4f}), worst {:.2f}% off; fit error {:.2e}, validation error {:.2e}; "
                      "{} evaluations, {:.1f} min on {} thread(s)",
                      r.coefficients[0], r.coefficients[1], r.coefficients[2], 100 * worst, r.fit_error, check.error,
                      r.evaluations, mins, o.jobs)};
}

Outcome planner_closure() {
  const auto config = coarse_fitted();
  const auto map = characterize(config, 15.0);
  const double side = 20.0 * map.R_yr;
  const auto square = plan_polygon(map, {{0, 0}, {side, 0}, {side, side}, {0, side}}, true);
  const auto square_run = execute_plan(config, square, 0.25 * square.half_period);
  const auto sq = audit_plan(square, square_run);

  const double radius = 5.0 * map.R_yr;
  const auto circle = plan_circle(map, radius, 1.0);
  const auto circle_run = execute_plan(config, circle, 0.25 * circle.half_period);
  const auto ci = audit_plan(circle, circle_run);

  const bool pass = sq.closure < 0.05 * side && ci.radial_rms < 0.05 * radius;
  return {pass, fmt::format("square side {:.3f} m: closure {:.4f} m ({:.2f}%), max waypoint error {:.4f} m; circle "
                            "r {:.3f} m: radial RMS {:.4f} m ({:.2f}%)",
                            side, sq.closure, 100 * sq.closure / side, sq.max_error, radius, ci.radial_rms,
                            100 * ci.radial_rms / radius)};
}

Outcome convergence() {
  const auto base = preset("control_sec4");
  auto fine = base;
  fine.nodes_per_tail = 2 * base.nodes_per_tail;
  fine.dt = 0.5 * base.time_step();
  const double tau = base.time_scale();
  const auto a = steady_run(base, 15.0, 40.0);
  const auto b = steady_run(fine, 15.0, 40.0);
  const double d_w = rel(b.omega_yr * tau, a.omega_yr * tau);
  const double d_r = rel(b.R_yr, a.R_yr);
  return {d_w < 0.02 && d_r < 0.02,
          fmt::format("omega_bar_yr {:.5f} -> {:.5f} ({:.3f}%), R_yr/l {:.5f} -> {:.5f} ({:.3f}%)", a.omega_yr * tau,
                      b.omega_yr * tau, 100 * d_w, a.R_yr / base.tail_length, b.R_yr / base.tail_length, 100 * d_r)};
}

Outcome determinism(const fs::path& cli, const fs::path& data) {
  const fs::path work = fs::temp_directory_path() / "flagsim_determinism";
  fs::remove_all(work);
  const auto config = (data / "fitted_sec2_coarse.cfg").string();
  const auto schedule = (data / "schedules" / "square_wave_15.csv").string();
  std::vector<std::string> outputs;
  for (const char* run : {"a", "b"}) {
    const auto cmd = fmt::format("\"{}\" simulate --config \"{}\" --schedule \"{}\" --out \"{}\" --snapshot-stride 10 "
                                 "> /dev/null",
                                 cli.string(), config, schedule, (work / run).string());
    if (std::system(cmd.c_str()) != 0) return {false, "simulate command failed: " + cmd};
  }
  int compared = 0;
  for (const char* file : {"trajectory.csv", "path.csv", "snapshots.bin"}) {
    const auto a = read_file(work / "a" / file);
    const auto b = read_file(work / "b" / file);
    if (a.empty() || a != b) return {false, fmt::format("{} differs between runs", file)};
    ++compared;
  }
  fs::remove_all(work);
  return {true, fmt::format("{} output files byte-identical across two runs", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path data = FLAGSIM_DATA_DIR;
  const fs::path cli = FLAGSIM_CLI_PATH;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"lateral-force constant", lateral_constant},
      {"intrinsic time scale", time_scale},
      {"RFT coefficients", rft_coefficients},
      {"elastic gradient vs finite differences", gradient_check},
      {"torque balance", torque_balance},
      {"circular trajectories and mirror symmetry", circular_trajectories},
      {"rigid-tail null result", rigid_tails},
      {"quasi-static mass insensitivity", quasi_static},
      {"calibration recovery", [&] { return calibration_recovery(data); }},
      {"planner closure", planner_closure},
      {"discretization convergence", convergence},
      {"determinism", [&] { return determinism(cli, data); }},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("FAIL criterion %d: no such criterion\n", id);
      ++failures;
      continue;
    }
    const auto& [name, run] = criteria[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
