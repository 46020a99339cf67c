#include "flagsim/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flagsim/error.hpp"
#include "flagsim/log.hpp"

namespace flagsim {

namespace {

Vec2 direction(double angle) { return {std::cos(angle), std::sin(angle)}; }
double angle_of(const Vec2& v) { return std::atan2(v.y(), v.x()); }
double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

void require_turning(const MotionPrimitiveMap& map) {
  if (!(std::abs(map.omega_yr) > 0.0) || !(map.path_speed > 0.0) || map.omega_H == 0.0)
    throw PlanError("motion primitive map has no turning behaviour");
}

// Bisection on a bracketed sign change of f over [a, b] to the given tolerance.
template <class F>
double bisect(F&& f, double a, double b, double tol) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// First sign change of f on a uniform scan of (a, b), refined by bisection.
template <class F>
bool solve_scan(F&& f, double a, double b, int samples, double tol, double& root) {
  double prev_x = a, prev_f = f(a);
  for (int i = 1; i <= samples; ++i) {
    const double x = a + (b - a) * i / samples;
    const double fx = f(x);
    if (std::isfinite(prev_f) && std::isfinite(fx) && ((prev_f <= 0.0) != (fx <= 0.0))) {
      root = bisect(f, prev_x, x, tol);
      return true;
    }
    prev_x = x;
    prev_f = fx;
  }
  return false;
}

int sign_of(const MotionPrimitiveMap& map, double omega) { return omega * map.omega_H > 0.0 ? 1 : -1; }

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Pose2 apply_kick(const MotionPrimitiveMap& map, Pose2 pose, int sign) {
  pose.p += rotate(Vec2(map.switch_kick.x(), sign * map.switch_kick.y()), pose.psi);
  return pose;
}

// `previous` is the sign in force before the schedule starts; 0 means the
// robot starts from rest.
std::vector<Pose2> predict_from(const MotionPrimitiveMap& map, const ActuationSchedule& schedule, const Pose2& start,
                                int previous) {
  std::vector<Pose2> out{start};
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const int sign = sign_of(map, schedule.omegas()[i]);
    double d = schedule.segment_end(i) - schedule.switch_times()[i];
    Pose2 pose = out.back();
    if (sign != previous) {
      d = std::max(0.0, d - map.switch_lag);
      pose = apply_kick(map, pose, sign);
    }
    out.push_back(advance(map, pose, sign, d));
    previous = sign;
  }
  return out;
}

// `lead` lengthens the first half-period to absorb a start-up stall so the
// axis still ends where it began.
ActuationSchedule line_schedule(double omega_H, double T, int periods, double lead = 0.0) {
  ActuationSchedule s;
  for (int k = 0; k < periods; ++k) {
    s.append(omega_H, 0.5 * T + (k == 0 ? lead : 0.0));
    s.append(-omega_H, T);
    s.append(omega_H, 0.5 * T);
  }
  return s;
}

void append_schedule(ActuationSchedule& into, const ActuationSchedule& from) {
  for (std::size_t i = 0; i < from.size(); ++i)
    into.append(from.omegas()[i], from.segment_end(i) - from.switch_times()[i]);
}

double lead_for(const MotionPrimitiveMap& map, int previous) { return previous == 1 ? 0.0 : map.switch_lag; }

Vec2 line_advance(const MotionPrimitiveMap& map, double T, int periods, int previous) {
  return predict_from(map, line_schedule(map.omega_H, T, periods, lead_for(map, previous)), {}, previous).back().p;
}

struct LineLeg {
  ActuationSchedule schedule;
  double T = 0.0;
  int periods = 0;
  double offset = 0.0;  // direction of net advance relative to the mean axis
};

LineLeg solve_line(const MotionPrimitiveMap& map, double length, double T, int previous = 0) {
  require_turning(map);
  if (!(length > 0.0)) throw PlanError("line length must be positive");
  if (T <= 0.0) T = default_half_period(map);
  if (!(T * std::abs(map.omega_yr) < kPi)) throw PlanError("half-period must keep each arc below a half-turn");
  if (!(T > map.switch_lag)) throw PlanError("half-period must exceed the switching lag");
  // Advance of one period away from the start-up transient.
  const double per_period = line_advance(map, T, 2, 1).norm() - line_advance(map, T, 1, 1).norm();
  if (!(per_period > 0.0)) throw PlanError("zig-zag produces no net advance (heading angle is 90 degrees)");
  LineLeg leg;
  leg.periods = std::max(1, static_cast<int>(std::ceil(length / per_period - 1e-9)));
  while (line_advance(map, T, leg.periods, previous).norm() < length) ++leg.periods;
  auto miss = [&](double t) { return line_advance(map, t, leg.periods, previous).norm() - length; };
  leg.T = bisect(miss, std::max(0.0, map.switch_lag), T, 1e-12 * std::max(1.0, T));
  leg.schedule = line_schedule(map.omega_H, leg.T, leg.periods, lead_for(map, previous));
  leg.offset = angle_of(line_advance(map, leg.T, leg.periods, previous));
  return leg;
}

}  // namespace

// ------------------------------------------------------------ primitives

MotionPrimitiveMap map_from_summary(const RobotConfig& config, double omega_H, const SteadyStateSummary& s) {
  if (s.fit_residual > 0.05 * s.R_yr) throw SteadyStateError("characterization run is not a steady circle");
  MotionPrimitiveMap m;
  m.omega_H = omega_H;
  m.omega_bar_H = omega_H * config.time_scale();
  m.omega_yr = s.omega_yr;
  m.R_yr = s.R_yr;
  m.theta_heading = s.theta_heading;
  m.heading_signed = s.heading_signed;
  m.path_speed = s.path_speed;
  m.tail_length = config.tail_length;
  m.fit_residual = s.fit_residual;
  return m;
}

MotionPrimitiveMap characterize(const RobotConfig& config, double omega_H, const CharacterizeOptions& options) {
  if (omega_H == 0.0 || !std::isfinite(omega_H)) throw PlanError("omega_H = 0 defines no motion primitive");
  const double duration = options.duration_time_scales * config.time_scale();
  SimulationOptions sim;
  sim.output_stride = duration / 400.0;
  const auto traj = simulate(config, ActuationSchedule::constant(omega_H, duration), sim);
  MotionPrimitiveMap map = map_from_summary(config, omega_H, summarize_steady(traj));
  if (options.switching_periods > 0) {
    const SwitchResponse r = measure_switch_response(config, map, options.switching_periods);
    map.switch_lag = r.lag;
    map.switch_kick = r.kick;
  }
  return map;
}

namespace {

double axis_angle_at(const Trajectory& traj, double t) {
  const auto it = std::lower_bound(traj.time.begin(), traj.time.end(), t);
  std::size_t i = std::min<std::size_t>(it - traj.time.begin(), traj.size() - 1);
  if (i > 0 && traj.time[i] - t > t - traj.time[i - 1]) --i;
  return angle_of(horizontal(traj.head_axis[i]));
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

SwitchResponse fit_switch_response(const MotionPrimitiveMap& map, const Trajectory& traj, double T,
                                   double first_switch) {
  require_turning(map);
  const double rate = std::abs(map.omega_yr);
  // Reversal k happens at first_switch + k T and selects -omega_H for even k.
  std::vector<double> psi, times;
  std::vector<Vec2> pos;
  for (double t = first_switch; t <= traj.time.back() + 1e-9 * T; t += T) {
    times.push_back(t);
    psi.push_back(axis_angle_at(traj, t));
    pos.push_back(horizontal(position_at(traj, t)));
  }
  const int periods = static_cast<int>(times.size() - 1) / 2;
  if (periods < 4) throw SteadyStateError("switch response needs at least four recorded periods");

  double swing = 0.0;
  int swings = 0;
  Vec2 measured = Vec2::Zero();
  for (int k = 1; k < periods; ++k) {
    const int j = 2 * k;
    swing += std::abs(wrap(psi[j + 1] - psi[j])) + std::abs(wrap(psi[j + 2] - psi[j + 1]));
    swings += 2;
    measured += rotate(pos[j + 2] - pos[j], -psi[j]);
  }
  measured /= periods - 1;

  // Over one period the two mirrored kicks only span the direction
  // ca(psi_mid); the lag (negative when the axis overshoots) absorbs the
  // perpendicular part of the measured displacement.
  MotionPrimitiveMap probe = map;
  probe.switch_lag = 0.0;
  probe.switch_kick = Vec2::Zero();
  struct Split {
    double along, across;
  };
  auto split = [&](double lag) {
    const Pose2 mid = advance(probe, {}, -1, T - lag);
    const Vec2 residual = measured - advance(probe, mid, 1, T - lag).p;
    const Vec2 ca = Vec2(1.0, 0.0) + rotate(Vec2(1.0, 0.0), mid.psi);
    const Vec2 perp(-ca.y(), ca.x());
    return Split{residual.dot(ca) / ca.squaredNorm(), residual.dot(perp) / perp.norm()};
  };
  SwitchResponse out;
  double lag = T - swing / swings / rate;
  if (!solve_scan([&](double l) { return split(l).across; }, -0.5 * T, 0.5 * T, 200, 1e-10 * T, lag))
    log().warn("switch response: displacement not matched by a lag; using the axis swing");
  out.lag = lag;
  out.kick = {split(lag).along, 0.0};
  return out;
}

SwitchResponse measure_switch_response(const RobotConfig& config, const MotionPrimitiveMap& map, int periods,
                                       double T) {
  if (T <= 0.0) T = default_half_period(map);
  SimulationOptions sim;
  sim.output_stride = T / 20.0;
  const auto traj = simulate(config, line_schedule(map.omega_H, T, periods + 1), sim);
  return fit_switch_response(map, traj, T, 0.5 * T);
}

Pose2 advance(const MotionPrimitiveMap& map, const Pose2& pose, int sign, double duration) {
  const double rate = sign * map.omega_yr;
  const double a = pose.psi + sign * map.heading_signed;
  const double turn = rate * duration;
  Pose2 out;
  out.psi = pose.psi + turn;
  if (std::abs(turn) < 1e-12) {
    out.p = pose.p + map.path_speed * duration * direction(a);
  } else {
    out.p = pose.p + (map.path_speed / rate) * Vec2(std::sin(a + turn) - std::sin(a), std::cos(a) - std::cos(a + turn));
  }
  return out;
}

std::vector<Pose2> predict_poses(const MotionPrimitiveMap& map, const ActuationSchedule& schedule, const Pose2& start) {
  return predict_from(map, schedule, start, 0);
}

Pose2 predict_pose_at(const MotionPrimitiveMap& map, const ActuationSchedule& schedule, double t,
                      const Pose2& start) {
  Pose2 pose = start;
  int previous = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double t0 = schedule.switch_times()[i];
    if (t <= t0 + 1e-12 * std::max(1.0, std::abs(t0))) break;
    const int sign = sign_of(map, schedule.omegas()[i]);
    const bool switched = sign != previous;
    if (switched) pose = apply_kick(map, pose, sign);
    const double moving_from = t0 + (switched ? map.switch_lag : 0.0);
    const double until = std::min(t, schedule.segment_end(i));
    if (until > moving_from) pose = advance(map, pose, sign, until - moving_from);
    previous = sign;
  }
  return pose;
}

double default_half_period(const MotionPrimitiveMap& map) {
  require_turning(map);
  const double ratio = map.tail_length / (2.0 * map.R_yr);
  const double arc = ratio < std::sin(0.45 * kPi) ? 2.0 * std::asin(ratio) : 0.9 * kPi;
  return arc / std::abs(map.omega_yr);
}

// ----------------------------------------------------------------- plans

Plan plan_line(const MotionPrimitiveMap& map, double length, double T) {
  const LineLeg leg = solve_line(map, length, T);
  Plan plan;
  plan.schedule = leg.schedule;
  plan.half_period = leg.T;
  plan.initial_yaw = -leg.offset;
  const Pose2 start{Vec2::Zero(), plan.initial_yaw};
  const double lead = lead_for(map, 0);
  for (int k = 0; k <= 2 * leg.periods; ++k) {
    const double t = k == 0 ? 0.0 : lead + k * leg.T;
    plan.waypoints.push_back({t, predict_pose_at(map, plan.schedule, t, start).p});
  }
  return plan;
}

Plan plan_circle(const MotionPrimitiveMap& map, double radius, double turns, double delta_theta) {
  require_turning(map);
  if (!(radius > map.R_yr)) throw PlanError("circle radius must exceed the turning radius R_yr");
  if (turns == 0.0 || !std::isfinite(turns)) throw PlanError("circle needs a non-zero number of turns");
  if (delta_theta < 0.0) throw PlanError("delta_theta must be non-negative");
  const double rate = std::abs(map.omega_yr);
  const int dir = turns > 0.0 ? 1 : -1;
  const int sa = (map.omega_yr > 0.0 ? 1 : -1) * dir;

  auto cycle = [&](double arc, double dtheta) {
    ActuationSchedule c;
    c.append(sa * map.omega_H, arc / rate + map.switch_lag);
    c.append(-sa * map.omega_H, (arc - dtheta) / rate + map.switch_lag);
    return c;
  };
  auto cycle_chord = [&](double arc, double dtheta) { return predict_from(map, cycle(arc, dtheta), {}, 0).back().p; };
  auto mismatch = [&](double arc, double dtheta) {
    return cycle_chord(arc, dtheta).norm() - 2.0 * radius * std::sin(0.5 * dtheta);
  };

  const double total = 2.0 * kPi * std::abs(turns);
  double arc = 0.0;
  if (delta_theta == 0.0) {
    const double arc0 = std::min(rate * default_half_period(map), 0.9 * kPi);
    double dt = 0.0;
    if (!solve_scan([&](double d) { return mismatch(arc0, d); }, 1e-9, arc0, 400, 1e-12, dt))
      throw PlanError("infeasible circle: no heading step matches radius " + std::to_string(radius) + " m");
    delta_theta = dt;
  }
  const int cycles = std::max(3, static_cast<int>(std::lround(total / delta_theta)));
  delta_theta = total / cycles;
  if (!(delta_theta < kPi))
    throw PlanError("infeasible circle: heading step per cycle must stay below a half-turn");
  if (!solve_scan([&](double a) { return mismatch(a, delta_theta); }, delta_theta, kPi, 400, 1e-8, arc))
    throw PlanError("infeasible circle: no arc angle in (delta_theta, pi) inscribes radius " +
                    std::to_string(radius) + " m");

  Plan plan;
  plan.theta_arc = arc;
  plan.delta_theta = delta_theta;
  plan.half_period = arc / rate;
  plan.initial_yaw = -angle_of(cycle_chord(arc, delta_theta));
  const double ta = arc / rate + map.switch_lag;
  const double tb = (arc - delta_theta) / rate + map.switch_lag;
  for (int k = 0; k < cycles; ++k) {
    plan.schedule.append(sa * map.omega_H, ta);
    plan.schedule.append(-sa * map.omega_H, tb);
  }
  const Pose2 start{Vec2::Zero(), plan.initial_yaw};
  std::vector<Vec2> vertices;
  for (int k = 0; k <= cycles; ++k) {
    const double t = k < cycles ? plan.schedule.switch_times()[2 * k] : plan.schedule.duration();
    const Vec2 p = predict_pose_at(map, plan.schedule, t, start).p;
    plan.waypoints.push_back({t, p});
    if (k < cycles) vertices.push_back(p);
  }
  const CircleFit fit = fit_circle(vertices);
  plan.circle_center = fit.center;
  plan.circle_radius = fit.radius;
  return plan;
}

Plan plan_polygon(const MotionPrimitiveMap& map, const std::vector<Vec2>& vertices, bool closed, double T) {
  require_turning(map);
  const auto n = static_cast<int>(vertices.size());
  if (n < (closed ? 3 : 2)) throw PlanError("polygon needs at least " + std::string(closed ? "3" : "2") + " vertices");
  const int edges = closed ? n : n - 1;
  std::vector<Vec2> dir(edges);
  std::vector<double> len(edges);
  for (int i = 0; i < edges; ++i) {
    const Vec2 e = vertices[(i + 1) % n] - vertices[i];
    len[i] = e.norm();
    if (!(len[i] > 0.0)) throw PlanError("polygon edge " + std::to_string(i) + " has zero length");
    dir[i] = e / len[i];
  }

  // Turn k happens at vertex k + 1, between edge k and edge k + 1 (cyclic for
  // closed polygons; the last one returns to the start pose).
  const int turns = closed ? edges : edges - 1;
  std::vector<double> alpha(turns);
  for (int k = 0; k < turns; ++k) {
    const Vec2& a = dir[k];
    const Vec2& b = dir[(k + 1) % edges];
    alpha[k] = std::atan2(cross2(a, b), a.dot(b));
    if (!(std::abs(alpha[k]) > 1e-9) || !(std::abs(alpha[k]) < kPi))
      throw PlanError("turn at vertex " + std::to_string((k + 1) % n) + " must lie strictly between 0 and 180 degrees");
  }

  // Line legs and their net-advance offsets are solved first from nominal
  // lengths, then again from the shortened lengths.
  const double rate = std::abs(map.omega_yr);
  auto turn_sign = [&](double a) { return (a > 0.0) == (map.omega_yr > 0.0) ? 1 : -1; };
  auto previous_sign = [&](int leg) { return leg == 0 ? 0 : turn_sign(alpha[leg - 1]); };
  std::vector<LineLeg> legs(edges);
  for (int i = 0; i < edges; ++i) legs[i] = solve_line(map, len[i], T, previous_sign(i));
  std::vector<double> turn_angle(turns);
  std::vector<double> cut_in(turns), cut_out(turns);
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < turns; ++k) {
      const int next = (k + 1) % edges;
      turn_angle[k] = alpha[k] + legs[k].offset - legs[next].offset;
      if (!(std::abs(turn_angle[k]) > 0.0) || !(std::abs(turn_angle[k]) < kPi) ||
          turn_sign(turn_angle[k]) != turn_sign(alpha[k]))
        throw PlanError("turn at vertex " + std::to_string((k + 1) % n) + " is infeasible after offset correction");
      // Chord of the turn in a frame where the incoming leg travels along +u.
      const Pose2 mean_axis{Vec2::Zero(), -legs[k].offset};
      const int sign = turn_sign(turn_angle[k]);
      ActuationSchedule turn;
      turn.append(sign * map.omega_H, std::abs(turn_angle[k]) / rate + (sign == 1 ? 0.0 : map.switch_lag));
      const Vec2 chord = predict_from(map, turn, mean_axis, 1).back().p;
      const Vec2 in(1.0, 0.0);
      const Vec2 out = direction(alpha[k]);
      const double det = cross2(in, out);
      cut_in[k] = cross2(chord, out) / det;
      cut_out[k] = cross2(in, chord) / det;
    }
    for (int i = 0; i < edges; ++i) {
      double eff = len[i];
      if (i < turns) eff -= cut_in[i];
      const int before = closed ? (i + edges - 1) % edges : i - 1;
      if (before >= 0) eff -= cut_out[before];
      if (!(eff > 0.0))
        throw PlanError("polygon edge " + std::to_string(i) + " is shorter than the turn-chord correction");
      legs[i] = solve_line(map, eff, T, previous_sign(i));
    }
  }

  Plan plan;
  plan.half_period = legs[0].T;
  plan.initial_yaw = angle_of(dir[0]) - legs[0].offset;
  std::vector<double> marks{0.0};
  for (int i = 0; i < edges; ++i) {
    append_schedule(plan.schedule, legs[i].schedule);
    marks.push_back(plan.schedule.duration());
    if (i < turns) {
      const double a = turn_angle[i];
      const int sign = turn_sign(a);
      plan.schedule.append(sign * map.omega_H, std::abs(a) / rate + (sign == 1 ? 0.0 : map.switch_lag));
      marks.push_back(plan.schedule.duration());
    }
  }
  const Pose2 start{Vec2::Zero(), plan.initial_yaw};
  for (double t : marks) plan.waypoints.push_back({t, predict_pose_at(map, plan.schedule, t, start).p});
  return plan;
}

Plan plan_path(const MotionPrimitiveMap& map, const PathSpec& spec) {
  switch (spec.variant) {
    case PathSpec::Variant::line:
      return plan_line(map, spec.length, spec.half_period);
    case PathSpec::Variant::circle:
      return plan_circle(map, spec.radius, spec.turns, spec.delta_theta);
    case PathSpec::Variant::polygon:
      return plan_polygon(map, spec.vertices, spec.closed, spec.half_period);
  }
  throw PlanError("unknown path variant");
}

// ------------------------------------------------------------- path spec

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError(key, line, "line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + text + "'");
  return v;
}

}  // namespace

PathSpec parse_path_spec(std::string_view text) {
  PathSpec spec;
  bool have_variant = false;
  bool have_length = false, have_radius = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("path", line, "line " + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "variant") {
      if (value == "line") spec.variant = PathSpec::Variant::line;
      else if (value == "circle") spec.variant = PathSpec::Variant::circle;
      else if (value == "polygon") spec.variant = PathSpec::Variant::polygon;
      else throw ConfigError(key, line, "line " + std::to_string(line) + ": unknown variant '" + value + "'");
      have_variant = true;
    } else if (key == "length_m") {
      spec.length = parse_number(key, value, line);
      have_length = true;
    } else if (key == "radius_m") {
      spec.radius = parse_number(key, value, line);
      have_radius = true;
    } else if (key == "turns") {
      spec.turns = parse_number(key, value, line);
    } else if (key == "delta_theta_rad") {
      spec.delta_theta = parse_number(key, value, line);
    } else if (key == "half_period_s") {
      spec.half_period = parse_number(key, value, line);
    } else if (key == "closed") {
      if (value != "true" && value != "false")
        throw ConfigError(key, line, "line " + std::to_string(line) + ": 'closed' expects true or false");
      spec.closed = value == "true";
    } else if (key == "vertex_m") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw ConfigError(key, line, "line " + std::to_string(line) + ": 'vertex_m' expects 'u, w'");
      spec.vertices.emplace_back(parse_number(key, trim(value.substr(0, comma)), line),
                                 parse_number(key, trim(value.substr(comma + 1)), line));
    } else {
      throw ConfigError(key, line, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (!have_variant) throw ConfigError("variant", 0, "path spec is missing 'variant'");
  if (spec.variant == PathSpec::Variant::line && !have_length)
    throw ConfigError("length_m", 0, "line path spec is missing 'length_m'");
  if (spec.variant == PathSpec::Variant::circle && !have_radius)
    throw ConfigError("radius_m", 0, "circle path spec is missing 'radius_m'");
  if (spec.variant == PathSpec::Variant::polygon && spec.vertices.size() < 2)
    throw ConfigError("vertex_m", 0, "polygon path spec needs at least two 'vertex_m' entries");
  return spec;
}

PathSpec load_path_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("path", 0, "cannot open path spec '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_path_spec(buffer.str());
}

std::string serialize_path_spec(const PathSpec& spec) {
  std::ostringstream out;
  out << std::setprecision(17);
  switch (spec.variant) {
    case PathSpec::Variant::line:
      out << "variant = line\nlength_m = " << spec.length << '\n';
      break;
    case PathSpec::Variant::circle:
      out << "variant = circle\nradius_m = " << spec.radius << "\nturns = " << spec.turns
          << "\ndelta_theta_rad = " << spec.delta_theta << '\n';
      break;
    case PathSpec::Variant::polygon:
      out << "variant = polygon\nclosed = " << (spec.closed ? "true" : "false") << '\n';
      for (const auto& v : spec.vertices) out << "vertex_m = " << v.x() << ", " << v.y() << '\n';
      break;
  }
  out << "half_period_s = " << spec.half_period << '\n';
  return out.str();
}

// ------------------------------------------------------------ map files

namespace {

struct MapField {
  const char* key;
  double MotionPrimitiveMap::*member;
};

constexpr MapField kMapFields[] = {
    {"omega_H_rad_s", &MotionPrimitiveMap::omega_H},
    {"omega_bar_H", &MotionPrimitiveMap::omega_bar_H},
    {"omega_yr_rad_s", &MotionPrimitiveMap::omega_yr},
    {"R_yr_m", &MotionPrimitiveMap::R_yr},
    {"theta_heading_rad", &MotionPrimitiveMap::theta_heading},
    {"heading_signed_rad", &MotionPrimitiveMap::heading_signed},
    {"path_speed_m_s", &MotionPrimitiveMap::path_speed},
    {"tail_length_m", &MotionPrimitiveMap::tail_length},
    {"fit_residual_m", &MotionPrimitiveMap::fit_residual},
    {"switch_lag_s", &MotionPrimitiveMap::switch_lag},
};

}  // namespace

void write_primitive_map(std::ostream& out, const MotionPrimitiveMap& map) {
  const auto old = out.precision(17);
  for (const auto& f : kMapFields) out << f.key << " = " << map.*f.member << '\n';
  out << "switch_kick_m = " << map.switch_kick.x() << ", " << map.switch_kick.y() << '\n';
  out.precision(old);
}

MotionPrimitiveMap parse_primitive_map(std::string_view text) {
  MotionPrimitiveMap map;
  std::vector<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("map", line, "line " + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "switch_kick_m") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw ConfigError(key, line, "line " + std::to_string(line) + ": 'switch_kick_m' expects 'u, w'");
      map.switch_kick = {parse_number(key, trim(value.substr(0, comma)), line),
                         parse_number(key, trim(value.substr(comma + 1)), line)};
    } else {
      const auto* f = std::find_if(std::begin(kMapFields), std::end(kMapFields),
                                   [&](const MapField& m) { return key == m.key; });
      if (f == std::end(kMapFields))
        throw ConfigError(key, line, "line " + std::to_string(line) + ": unknown key '" + key + "'");
      map.*(f->member) = parse_number(key, value, line);
    }
    seen.push_back(key);
  }
  auto require = [&](const std::string& key) {
    if (std::find(seen.begin(), seen.end(), key) == seen.end())
      throw ConfigError(key, 0, "primitive map is missing '" + key + "'");
  };
  for (const auto& f : kMapFields) require(f.key);
  require("switch_kick_m");
  return map;
}

MotionPrimitiveMap load_primitive_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("map", 0, "cannot open primitive map '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_primitive_map(buffer.str());
}

// ------------------------------------------------------------- execution

Trajectory execute_plan(const RobotConfig& config, const Plan& plan, double output_stride) {
  SimulationOptions sim;
  sim.output_stride = output_stride;
  sim.initial_yaw = plan.initial_yaw;
  return simulate(config, plan.schedule, sim);
}

PlanAudit audit_plan(const Plan& plan, const Trajectory& traj) {
  if (traj.size() == 0) throw PlanError("cannot audit an empty trajectory");
  const Vec2 origin = horizontal(traj.head_position.front());
  PlanAudit out;
  double sum = 0.0;
  for (const auto& w : plan.waypoints) {
    const Vec2 p = horizontal(position_at(traj, w.t)) - origin;
    out.executed.push_back(p);
    const double e = (p - w.p).norm();
    out.max_error = std::max(out.max_error, e);
    sum += e * e;
  }
  if (!plan.waypoints.empty()) out.rms_error = std::sqrt(sum / static_cast<double>(plan.waypoints.size()));
  out.closure = (horizontal(traj.head_position.back()) - origin).norm();
  if (plan.circle_radius > 0.0 && !out.executed.empty()) {
    double radial = 0.0;
    for (const auto& p : out.executed) radial += std::pow((p - plan.circle_center).norm() - plan.circle_radius, 2);
    out.radial_rms = std::sqrt(radial / static_cast<double>(out.executed.size()));
  }
  return out;
}

}  // namespace flagsim
