#include "sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "flagsim/analysis.hpp"
#include "flagsim/error.hpp"

namespace flagsim::cli {

namespace {

constexpr const char* kNames[] = {"c_t", "c_r", "c_yr", "l_over_R", "L_over_R", "l_over_r0", "omega_bar", "N"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string line_prefix(int line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

std::size_t SweepSpec::points() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.second.size();
  return n;
}

SweepSpec parse_sweep_spec(std::string_view text) {
  SweepSpec spec;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep", line, line_prefix(line) + "expected 'name = v1, v2, ...'");
    const std::string name = trim(body.substr(0, eq));
    if (std::find(std::begin(kNames), std::end(kNames), name) == std::end(kNames))
      throw ConfigError(name, line, line_prefix(line) + "unknown sweep parameter '" + name + "'");
    for (const auto& axis : spec.axes)
      if (axis.first == name) throw ConfigError(name, line, line_prefix(line) + "parameter '" + name + "' repeated");
    std::vector<double> values;
    std::istringstream list(body.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v))
        throw ConfigError(name, line, line_prefix(line) + "'" + item + "' is not a number");
      if (name == "N" && (v < 1.0 || v != std::floor(v)))
        throw ConfigError(name, line, line_prefix(line) + "N must be a positive integer");
      values.push_back(v);
    }
    if (values.empty()) throw ConfigError(name, line, line_prefix(line) + "empty grid for '" + name + "'");
    spec.axes.emplace_back(name, std::move(values));
  }
  if (spec.axes.empty()) throw ConfigError("sweep", 0, "sweep spec defines no parameters");
  if (std::none_of(spec.axes.begin(), spec.axes.end(), [](const auto& a) { return a.first == "omega_bar"; }))
    throw ConfigError("omega_bar", 0, "sweep spec must list omega_bar");
  return spec;
}

std::string serialize_sweep_spec(const SweepSpec& spec) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& [name, values] : spec.axes) {
    out << name << " =";
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? ", " : " ") << values[i];
    out << '\n';
  }
  return out.str();
}

SweepPoint sweep_point(const RobotConfig& base, const SweepSpec& spec, std::size_t index) {
  std::vector<std::pair<std::string, double>> chosen;
  for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
    const auto& values = it->second;
    chosen.emplace_back(it->first, values[index % values.size()]);
    index /= values.size();
  }
  auto find = [&](const char* name, double& value) {
    for (const auto& [n, v] : chosen)
      if (n == name) {
        value = v;
        return true;
      }
    return false;
  };

  SweepPoint p;
  RobotConfig& c = p.config;
  c = base;
  const double R = c.head_radius;
  double v = 0.0;
  if (find("c_t", v)) c.c_t = v;
  if (find("c_r", v)) c.c_r = v;
  if (find("c_yr", v)) c.c_yr = v;
  if (find("N", v)) c.tails = static_cast<int>(v);
  if (find("L_over_R", v)) c.head_length = v * R;
  const double slenderness = c.tail_length / c.tail_radius;
  if (find("l_over_R", v)) c.tail_length = v * R;
  c.tail_radius = c.tail_length / (find("l_over_r0", v) ? v : slenderness);
  find("omega_bar", p.omega_bar);
  p.omega = p.omega_bar / c.time_scale();
  c.validate();
  return p;
}

void run_sweep(std::ostream& out, const RobotConfig& base, const SweepSpec& spec, const SweepOptions& options) {
  struct Row {
    SweepPoint point;
    SteadyStateSummary summary;
    std::string status = "ok";
  };
  std::vector<Row> rows(spec.points());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].point = sweep_point(base, spec, i);

  parallel_for(static_cast<int>(rows.size()), options.jobs, [&](int i) {
    Row& row = rows[i];
    try {
      const double tau = row.point.config.time_scale();
      const double duration = options.duration_time_scales * tau;
      SimulationOptions sim;
      sim.output_stride = duration / 400.0;
      const auto traj = simulate(row.point.config, ActuationSchedule::constant(row.point.omega, duration), sim);
      row.summary = summarize_steady(traj);
    } catch (const Error& e) {
      row.status = e.what();
      std::replace(row.status.begin(), row.status.end(), ',', ';');
      std::replace(row.status.begin(), row.status.end(), '\n', ' ');
    }
  });

  out << "c_t,c_r,c_yr,l_over_R,L_over_R,l_over_r0,omega_bar,N,omega_rad_s,"
         "omega_bar_h,omega_bar_yr,R_yr_over_l,theta_heading_rad,path_speed_m_s,status\n";
  out << std::setprecision(10);
  for (const auto& row : rows) {
    const RobotConfig& c = row.point.config;
    const double tau = c.time_scale();
    const bool ok = row.status == "ok";
    auto value = [&](double v) { return ok ? v : std::nan(""); };
    out << c.c_t << ',' << c.c_r << ',' << c.c_yr << ',' << c.tail_length / c.head_radius << ','
        << c.head_length / c.head_radius << ',' << c.tail_length / c.tail_radius << ',' << row.point.omega_bar << ','
        << c.tails << ',' << row.point.omega << ',' << value(row.summary.omega_h * tau) << ','
        << value(row.summary.omega_yr * tau) << ',' << value(row.summary.R_yr / c.tail_length) << ','
        << value(row.summary.theta_heading) << ',' << value(row.summary.path_speed) << ',' << row.status << '\n';
  }
}

}  // namespace flagsim::cli
