#include "flagsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/SVD>

#include "flagsim/error.hpp"
#include "flagsim/log.hpp"

namespace flagsim {

// ------------------------------------------------------------ circle fit

CircleFit fit_circle(const std::vector<Vec2>& points) {
  const auto n = static_cast<int>(points.size());
  if (n < 3) throw FitError("circle fit needs at least three points");

  Vec2 mean = Vec2::Zero();
  for (const auto& p : points) mean += p;
  mean /= n;
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - mean).norm());
  if (!(scale > 0.0)) throw FitError("circle fit on coincident points");

  Eigen::MatrixXd a(n, 3);
  VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 u = (points[i] - mean) / scale;
    a(i, 0) = u.x();
    a(i, 1) = u.y();
    a(i, 2) = 1.0;
    b[i] = -u.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[2] > 0.0) || sv[0] / sv[2] > 1e10) throw FitError("degenerate circle fit: points are collinear");
  const Eigen::Vector3d sol = svd.solve(b);
  Vec2 c(-0.5 * sol[0], -0.5 * sol[1]);
  double r2 = c.squaredNorm() - sol[2];
  if (!(r2 > 0.0)) throw FitError("degenerate circle fit: negative squared radius");
  double r = std::sqrt(r2);

  // Gauss-Newton on sum (|u_i - c| - r)^2 in scaled coordinates.
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::MatrixXd j(n, 3);
    VectorXd res(n);
    for (int i = 0; i < n; ++i) {
      const Vec2 d = (points[i] - mean) / scale - c;
      const double dist = d.norm();
      if (!(dist > 0.0)) throw FitError("circle fit: point at the center");
      res[i] = dist - r;
      j(i, 0) = -d.x() / dist;
      j(i, 1) = -d.y() / dist;
      j(i, 2) = -1.0;
    }
    const Eigen::Vector3d step = j.colPivHouseholderQr().solve(-res);
    c += step.head<2>();
    r += step[2];
    if (step.norm() < 1e-15 * std::max(1.0, r)) break;
  }

  CircleFit out;
  out.center = mean + scale * c;
  out.radius = scale * std::abs(r);
  double sum = 0.0;
  for (const auto& p : points) {
    const double e = (p - out.center).norm() - out.radius;
    sum += e * e;
  }
  out.residual = std::sqrt(sum / n);
  return out;
}

// ---------------------------------------------------------- trajectories

namespace {

std::pair<std::size_t, std::size_t> window_indices(const Trajectory& traj, TimeWindow& window) {
  if (traj.size() < 2) throw SteadyStateError("trajectory has fewer than two samples");
  const double t0 = traj.time.front();
  const double t1 = traj.time.back();
  if (window.end < 0.0) window.end = t1;
  if (window.begin < 0.0) window.begin = t0 + 0.25 * (t1 - t0);
  if (!(window.end > window.begin)) throw SteadyStateError("empty analysis window");
  const auto first = static_cast<std::size_t>(
      std::lower_bound(traj.time.begin(), traj.time.end(), window.begin - 1e-12) - traj.time.begin());
  const auto last = static_cast<std::size_t>(
      std::upper_bound(traj.time.begin(), traj.time.end(), window.end + 1e-12) - traj.time.begin());
  if (last < first + 3) throw SteadyStateError("analysis window holds fewer than three samples");
  return {first, last};
}

double unwrap_step(double angle, double previous) {
  return angle + 2.0 * kPi * std::round((previous - angle) / (2.0 * kPi));
}

Vec2 unit_axis(const Vec3& axis) {
  const Vec2 a = horizontal(axis);
  const double n = a.norm();
  if (!(n > 1e-9)) throw SteadyStateError("head axis is vertical");
  return a / n;
}

}  // namespace

SteadyStateSummary summarize_steady(const Trajectory& traj, TimeWindow window) {
  const auto [first, last] = window_indices(traj, window);
  std::vector<Vec2> pts;
  for (std::size_t i = first; i < last; ++i) pts.push_back(horizontal(traj.head_position[i]));
  const CircleFit fit = fit_circle(pts);
  if (fit.residual > 0.05 * fit.radius) {
    std::ostringstream msg;
    msg << "not yet steady: circle-fit residual " << fit.residual << " m exceeds 5% of radius " << fit.radius
        << " m";
    throw SteadyStateError(msg.str());
  }

  SteadyStateSummary out;
  out.R_yr = fit.radius;
  out.circle_center = fit.center;
  out.fit_residual = fit.residual;
  out.window_begin = traj.time[first];
  out.window_end = traj.time[last - 1];

  double phi_prev = 0.0, phi_start = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const Vec2 d = pts[i - first] - fit.center;
    double phi = std::atan2(d.y(), d.x());
    phi = i == first ? phi : unwrap_step(phi, phi_prev);
    if (i == first) phi_start = phi;
    phi_prev = phi;
  }
  out.omega_yr = (phi_prev - phi_start) / (out.window_end - out.window_begin);

  const double sign = out.omega_yr >= 0.0 ? 1.0 : -1.0;
  double heading = 0.0, signed_heading = 0.0, wh = 0.0, wt = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const Vec2 d = (pts[i - first] - fit.center).normalized();
    const Vec2 tangent = sign * Vec2(-d.y(), d.x());
    const Vec2 axis = unit_axis(traj.head_axis[i]);
    heading += std::acos(std::clamp(axis.dot(tangent), -1.0, 1.0));
    signed_heading += std::atan2(axis.x() * tangent.y() - axis.y() * tangent.x(), axis.dot(tangent));
    wh += traj.omega_h[i];
    wt += traj.omega_t[i];
  }
  const auto count = static_cast<double>(last - first);
  out.theta_heading = heading / count;
  out.heading_signed = signed_heading / count;
  out.omega_h = wh / count;
  out.omega_t = wt / count;
  out.path_speed = std::abs(out.omega_yr) * out.R_yr;
  out.axial_speed = mean_axial_speed(traj, window);
  return out;
}

double mean_axial_speed(const Trajectory& traj, TimeWindow window) {
  const auto [first, last] = window_indices(traj, window);
  double along = 0.0;
  for (std::size_t i = first; i + 1 < last; ++i) {
    const Vec3 axis = (traj.head_axis[i] + traj.head_axis[i + 1]).normalized();
    along += (traj.head_position[i + 1] - traj.head_position[i]).dot(axis);
  }
  return along / (traj.time[last - 1] - traj.time[first]);
}

Vec3 position_at(const Trajectory& traj, double t) {
  if (traj.size() == 0) throw SteadyStateError("empty trajectory");
  if (t <= traj.time.front()) return traj.head_position.front();
  if (t >= traj.time.back()) return traj.head_position.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(traj.time.begin(), traj.time.end(), t) - traj.time.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - traj.time[lo]) / (traj.time[hi] - traj.time[lo]);
  return (1.0 - w) * traj.head_position[lo] + w * traj.head_position[hi];
}

SwitchingSummary summarize_switching(const Trajectory& traj, double T, double first_switch) {
  if (!(T > 0.0)) throw SteadyStateError("switching half-period must be positive");
  if (traj.size() < 2) throw SteadyStateError("trajectory has fewer than two samples");
  double start = first_switch;
  if (std::isnan(start)) {
    start = traj.time.front();
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (traj.omega_motor[i] * traj.omega_motor[i - 1] < 0.0) {
        start = traj.time[i - 1];
        break;
      }
    }
  }
  const double period = 2.0 * T;
  std::vector<double> bounds;
  for (double t = start; t <= traj.time.back() + 1e-9 * period; t += period) bounds.push_back(t);
  if (bounds.size() < 5) throw SteadyStateError("fewer than three full switching periods after the first");

  SwitchingSummary out;
  out.period = period;
  Vec2 total = Vec2::Zero();
  for (std::size_t k = 2; k < bounds.size(); ++k) {
    const Vec2 d = horizontal(position_at(traj, bounds[k]) - position_at(traj, bounds[k - 1]));
    out.displacements.push_back(d);
    total += d;
  }
  const auto count = static_cast<double>(out.displacements.size());
  const Vec2 mean = total / count;
  if (!(mean.norm() > 0.0)) throw SteadyStateError("no net displacement per period");
  double scatter = 0.0;
  for (const auto& d : out.displacements) scatter = std::max(scatter, (d - mean).norm() / mean.norm());
  if (scatter > 0.2) {
    std::ostringstream msg;
    msg << "non-periodic motion: per-period displacement scatter " << 100.0 * scatter << "% exceeds 20%";
    throw SteadyStateError(msg.str());
  }
  out.direction = mean.normalized();
  out.v = total.norm() / (count * period);

  double heading = 0.0;
  int samples = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.time[i] < bounds[1] || traj.time[i] > bounds.back()) continue;
    heading += std::acos(std::clamp(unit_axis(traj.head_axis[i]).dot(out.direction), -1.0, 1.0));
    ++samples;
  }
  out.theta_heading = samples ? heading / samples : 0.0;
  return out;
}

NondimScale nondimensionalize(const RobotConfig& config) { return {config.time_scale()}; }

// ---------------------------------------------------------- measurements

std::vector<Measurement> read_measurements_csv(std::istream& in) {
  static const std::string kHeader = "N,l_m,omega_motor_rad_s,omega_h_rad_s,omega_yr_rad_s";
  std::vector<Measurement> out;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kHeader) throw ConfigError("header", line_no, "measurement header must be '" + kHeader + "'");
      header = true;
      continue;
    }
    std::istringstream row(line);
    Measurement m;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(row >> m.tails >> c1 >> m.tail_length >> c2 >> m.omega_motor >> c3 >> m.omega_h >> c4 >> m.omega_yr) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
      throw ConfigError("row", line_no, "line " + std::to_string(line_no) + ": malformed measurement row");
    out.push_back(m);
  }
  if (!header) throw ConfigError("header", 0, "measurement file has no header");
  return out;
}

std::vector<Measurement> load_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("measurements", 0, "cannot open measurement file '" + path + "'");
  return read_measurements_csv(in);
}

void write_measurements_csv(std::ostream& out, const std::vector<Measurement>& measurements) {
  out << "N,l_m,omega_motor_rad_s,omega_h_rad_s,omega_yr_rad_s\n" << std::setprecision(12);
  for (const auto& m : measurements)
    out << m.tails << ',' << m.tail_length << ',' << m.omega_motor << ',' << m.omega_h << ',' << m.omega_yr << '\n';
}

// ----------------------------------------------------------- calibration

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(1, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SteadyStateSummary predict_steady(RobotConfig config, double omega, const CalibrationOptions& options) {
  if (options.step_time_scales > 0.0) config.dt = options.step_time_scales * config.time_scale();
  if (options.max_step_angle > 0.0 && omega != 0.0)
    config.dt = std::min(config.dt, options.max_step_angle / std::abs(omega));
  const double duration = options.duration_time_scales * config.time_scale();
  SimulationOptions sim;
  sim.output_stride = duration / 200.0;
  const Trajectory traj = simulate(config, ActuationSchedule::constant(omega, duration), sim);
  return summarize_steady(traj);
}

namespace {

RobotConfig site_config(const RobotConfig& base, const Measurement& m) {
  RobotConfig cfg = base;
  cfg.tails = m.tails;
  cfg.tail_length = m.tail_length;
  return cfg;
}

}  // namespace

std::vector<Measurement> synthesize_measurements(const RobotConfig& base, const std::vector<Measurement>& sites,
                                                 const CalibrationOptions& options) {
  std::vector<Measurement> out(sites.size());
  parallel_for(static_cast<int>(sites.size()), options.jobs, [&](int i) {
    const auto s = predict_steady(site_config(base, sites[i]), sites[i].omega_motor, options);
    out[i] = sites[i];
    out[i].omega_h = s.omega_h;
    out[i].omega_yr = s.omega_yr;
  });
  return out;
}

FitEvaluation evaluate_fit(const std::vector<Measurement>& measurements, const RobotConfig& base,
                           const std::array<double, 3>& coefficients, const CalibrationOptions& options) {
  FitEvaluation out;
  out.residuals.resize(measurements.size());
  parallel_for(static_cast<int>(measurements.size()), options.jobs, [&](int i) {
    auto& r = out.residuals[i];
    r.measured = measurements[i];
    RobotConfig cfg = site_config(base, measurements[i]);
    cfg.c_t = coefficients[0];
    cfg.c_r = coefficients[1];
    cfg.c_yr = coefficients[2];
    try {
      const auto s = predict_steady(cfg, measurements[i].omega_motor, options);
      r.predicted_h = s.omega_h;
      r.predicted_yr = s.omega_yr;
      r.error_h = std::abs(s.omega_h - r.measured.omega_h) / std::abs(r.measured.omega_h);
      r.error_yr = std::abs(s.omega_yr - r.measured.omega_yr) / std::abs(r.measured.omega_yr);
    } catch (const Error& e) {
      r.failure = e.what();
    }
  });
  double sum = 0.0;
  for (const auto& r : out.residuals) {
    if (!r.failure.empty()) {
      out.error = std::numeric_limits<double>::infinity();
      return out;
    }
    sum += 0.5 * (r.error_h + r.error_yr);
  }
  out.error = sum / static_cast<double>(out.residuals.size());
  return out;
}

namespace {

using Point = std::array<double, 3>;

struct NelderMead {
  std::function<double(const Point&)> f;
  double lower, upper;
  int max_evaluations;
  double f_tol, x_tol;
  int evaluations = 0;

  Point clamp(Point p) const {
    for (auto& v : p) v = std::clamp(v, lower, upper);
    return p;
  }
  double eval(const Point& p) {
    ++evaluations;
    return f(p);
  }

  std::pair<Point, double> run(const Point& start, const Point& step) {
    std::array<Point, 4> x;
    std::array<double, 4> fx;
    x[0] = clamp(start);
    fx[0] = eval(x[0]);
    for (int i = 0; i < 3; ++i) {
      Point p = x[0];
      p[i] += step[i];
      if (p[i] > upper) p[i] = x[0][i] - step[i];
      x[i + 1] = clamp(p);
      fx[i + 1] = eval(x[i + 1]);
    }
    while (evaluations < max_evaluations) {
      std::array<int, 4> order{0, 1, 2, 3};
      std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
      std::array<Point, 4> xs;
      std::array<double, 4> fs;
      for (int i = 0; i < 4; ++i) {
        xs[i] = x[order[i]];
        fs[i] = fx[order[i]];
      }
      x = xs;
      fx = fs;

      double size = 0.0;
      for (int i = 1; i < 4; ++i)
        for (int k = 0; k < 3; ++k) size = std::max(size, std::abs(x[i][k] - x[0][k]) / std::max(1.0, std::abs(x[0][k])));
      if (std::abs(fx[3] - fx[0]) <= f_tol && size <= x_tol) break;

      Point centroid{0.0, 0.0, 0.0};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) centroid[k] += x[i][k] / 3.0;
      auto along = [&](double t) {
        Point p;
        for (int k = 0; k < 3; ++k) p[k] = centroid[k] + t * (x[3][k] - centroid[k]);
        return clamp(p);
      };
      const Point xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < fx[0]) {
        const Point xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          x[3] = xe;
          fx[3] = fe;
        } else {
          x[3] = xr;
          fx[3] = fr;
        }
        continue;
      }
      if (fr < fx[2]) {
        x[3] = xr;
        fx[3] = fr;
        continue;
      }
      const bool outside = fr < fx[3];
      const Point xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fx[3])) {
        x[3] = xc;
        fx[3] = fc;
        continue;
      }
      for (int i = 1; i < 4; ++i) {
        for (int k = 0; k < 3; ++k) x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
        fx[i] = eval(x[i]);
      }
    }
    const auto best = std::min_element(fx.begin(), fx.end()) - fx.begin();
    return {x[best], fx[best]};
  }
};

}  // namespace

CalibrationResult calibrate(const std::vector<Measurement>& measurements, const RobotConfig& base,
                            const CalibrationOptions& options) {
  if (measurements.size() < 4) throw CalibrationError("calibration needs at least four measurements");
  {
    std::vector<std::pair<int, double>> sites;
    for (const auto& m : measurements) sites.emplace_back(m.tails, m.tail_length);
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    if (sites.size() < 2) throw CalibrationError("calibration needs at least two distinct (N, l) settings");
  }
  for (const auto& m : measurements)
    if (m.omega_h == 0.0 || m.omega_yr == 0.0)
      throw CalibrationError("measurement with zero omega_h or omega_yr cannot enter a relative error");
  if (options.seed_grid < 2) throw CalibrationError("seed grid needs at least two points per axis");

  const int g = options.seed_grid;
  const double spacing = (options.upper - options.lower) / (g - 1);
  std::vector<Point> grid;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k)
        grid.push_back({options.lower + i * spacing, options.lower + j * spacing, options.lower + k * spacing});

  // Grid candidates fan out across workers; each candidate runs its
  // measurements serially.
  CalibrationOptions serial = options;
  serial.jobs = 1;
  std::vector<double> grid_error(grid.size());
  std::vector<std::string> grid_failure(grid.size());
  parallel_for(static_cast<int>(grid.size()), options.jobs, [&](int i) {
    const auto fit = evaluate_fit(measurements, base, grid[i], serial);
    grid_error[i] = fit.error;
    for (const auto& r : fit.residuals)
      if (!r.failure.empty()) {
        grid_failure[i] = "N=" + std::to_string(r.measured.tails) + " l=" + std::to_string(r.measured.tail_length) +
                          ": " + r.failure;
        break;
      }
  });
  const auto best = std::min_element(grid_error.begin(), grid_error.end()) - grid_error.begin();
  if (!std::isfinite(grid_error[best])) {
    std::ostringstream msg;
    msg << "every calibration candidate failed to reach steady state; e.g.";
    for (std::size_t i = 0; i < grid.size() && i < 5; ++i)
      msg << "\n  C=(" << grid[i][0] << ", " << grid[i][1] << ", " << grid[i][2] << ") " << grid_failure[i];
    throw CalibrationError(msg.str());
  }
  log().info("calibration grid best C=({}, {}, {}) error={}", grid[best][0], grid[best][1], grid[best][2],
             grid_error[best]);

  // The simplex moves in log-coefficients. It is restarted from the best
  // vertex until a restart no longer improves the objective by f_tol.
  std::map<Point, double> seen;
  auto to_linear = [](const Point& u) { return Point{std::exp(u[0]), std::exp(u[1]), std::exp(u[2])}; };
  NelderMead nm{[&](const Point& u) {
                  const auto [it, fresh] = seen.try_emplace(u, 0.0);
                  if (fresh) it->second = evaluate_fit(measurements, base, to_linear(u), options).error;
                  return it->second;
                },
                std::log(options.lower),
                std::log(options.upper),
                options.max_evaluations,
                options.f_tol,
                options.x_tol};
  const double log_step = 0.5 * std::log(grid[best][0] + spacing) - 0.5 * std::log(grid[best][0]);
  auto [u, value] = nm.run({std::log(grid[best][0]), std::log(grid[best][1]), std::log(grid[best][2])},
                           {log_step, log_step, log_step});
  for (int restart = 0; restart < 20 && nm.evaluations < options.max_evaluations; ++restart) {
    const auto [u2, v2] = nm.run(u, {0.05, 0.05, 0.05});
    const bool improved = v2 < value - options.f_tol;
    if (v2 < value) {
      u = u2;
      value = v2;
    }
    if (!improved) break;
  }
  const Point point = to_linear(u);

  CalibrationResult out;
  out.coefficients = point;
  const auto final_fit = evaluate_fit(measurements, base, point, options);
  out.fit_error = final_fit.error;
  out.residuals = final_fit.residuals;
  out.evaluations = static_cast<int>(grid.size() + seen.size()) + 1;
  for (int i = 0; i < 3; ++i) {
    Point p = point;
    p[i] *= 1.01;
    out.sensitivity[i] = (evaluate_fit(measurements, base, p, options).error - out.fit_error) / std::log(1.01);
    ++out.evaluations;
  }
  log().info("calibration finished after {} evaluations, error={}", out.evaluations, out.fit_error);
  return out;
}

void write_calibration_report(std::ostream& out, const CalibrationResult& result) {
  out << std::setprecision(8);
  out << "c_t: " << result.coefficients[0] << '\n';
  out << "c_r: " << result.coefficients[1] << '\n';
  out << "c_yr: " << result.coefficients[2] << '\n';
  out << "fit_error: " << result.fit_error << '\n';
  out << "evaluations: " << result.evaluations << '\n';
  out << "sensitivity_c_t: " << result.sensitivity[0] << '\n';
  out << "sensitivity_c_r: " << result.sensitivity[1] << '\n';
  out << "sensitivity_c_yr: " << result.sensitivity[2] << '\n';
  out << '\n' << "N,l_m,omega_motor_rad_s,omega_h_measured,omega_h_predicted,omega_yr_measured,omega_yr_predicted,"
      << "error_h,error_yr\n";
  for (const auto& r : result.residuals) {
    out << r.measured.tails << ',' << r.measured.tail_length << ',' << r.measured.omega_motor << ','
        << r.measured.omega_h << ',' << r.predicted_h << ',' << r.measured.omega_yr << ',' << r.predicted_yr << ','
        << r.error_h << ',' << r.error_yr << '\n';
  }
}

}  // namespace flagsim
