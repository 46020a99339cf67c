#include "flagsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "flagsim/error.hpp"
#include "flagsim/geometry.hpp"

namespace flagsim {
namespace {

struct FieldSpec {
  const char* section;
  const char* key;
  std::variant<double RobotConfig::*, int RobotConfig::*> member;
};

// Order defines the serialized layout.
const std::vector<FieldSpec>& field_table() {
  static const std::vector<FieldSpec> table = {
      {"robot", "tails", &RobotConfig::tails},
      {"robot", "tail_length_m", &RobotConfig::tail_length},
      {"robot", "tail_radius_m", &RobotConfig::tail_radius},
      {"robot", "head_radius_m", &RobotConfig::head_radius},
      {"robot", "head_length_m", &RobotConfig::head_length},
      {"robot", "spoke_length_m", &RobotConfig::spoke_length},
      {"material", "youngs_modulus_pa", &RobotConfig::youngs_modulus},
      {"material", "shear_modulus_pa", &RobotConfig::shear_modulus},
      {"fluid", "mu0_pa_s", &RobotConfig::mu0},
      {"fluid", "interface_h_m", &RobotConfig::interface_h},
      {"fluid", "interface_k", &RobotConfig::interface_k},
      {"drag", "c_t", &RobotConfig::c_t},
      {"drag", "c_r", &RobotConfig::c_r},
      {"drag", "c_yr", &RobotConfig::c_yr},
      {"numerics", "nodes_per_tail", &RobotConfig::nodes_per_tail},
      {"numerics", "dt_s", &RobotConfig::dt},
      {"numerics", "rigid_multiplier", &RobotConfig::rigid_multiplier},
      {"numerics", "rho_line_kg_m", &RobotConfig::rho_line},
      {"numerics", "head_mass_kg", &RobotConfig::head_mass},
      {"numerics", "interface_hold", &RobotConfig::interface_hold},
      {"numerics", "newton_tol", &RobotConfig::newton_tol},
      {"numerics", "newton_max_iter", &RobotConfig::newton_max_iter},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, 0, std::string("invalid ") + field + ": " + what);
}

}  // namespace

double RobotConfig::bending_stiffness() const {
  return kPi * youngs_modulus * std::pow(tail_radius, 4) / 4.0;
}

double RobotConfig::time_scale() const {
  return mu0 * std::pow(tail_length, 4) / bending_stiffness();
}

double RobotConfig::time_step() const { return dt > 0.0 ? dt : 1e-3 * time_scale(); }

double RobotConfig::force_scale() const {
  return bending_stiffness() / (tail_length * tail_length);
}

void RobotConfig::validate() const {
  require(tails >= 2, "tails", "need at least 2 tails");
  require(tail_length > 0.0, "tail_length_m", "must be positive");
  require(tail_radius > 0.0, "tail_radius_m", "must be positive");
  require(tail_length / tail_radius > std::exp(0.5), "tail_length_m",
          "slenderness l/r0 too small for resistive force theory");
  require(head_radius > 0.0, "head_radius_m", "must be positive");
  require(head_length > 0.0, "head_length_m", "must be positive");
  require(spoke_length > 0.0, "spoke_length_m", "must be positive");
  require(youngs_modulus > 0.0, "youngs_modulus_pa", "must be positive");
  require(shear_modulus > 0.0, "shear_modulus_pa", "must be positive");
  require(mu0 > 0.0, "mu0_pa_s", "must be positive");
  require(interface_k >= 0.0, "interface_k", "must be non-negative");
  require(c_t > 0.0, "c_t", "must be positive");
  require(c_r > 0.0, "c_r", "must be positive");
  require(c_yr >= 0.0, "c_yr", "must be non-negative");
  require(nodes_per_tail >= 3, "nodes_per_tail", "need at least 3 nodes per tail");
  require(std::isfinite(dt), "dt_s", "must be finite");
  require(rigid_multiplier >= 1e3, "rigid_multiplier", "must be at least 1e3");
  require(rho_line > 0.0, "rho_line_kg_m", "must be positive");
  require(head_mass > 0.0, "head_mass_kg", "must be positive");
  require(interface_hold >= 0.0 && std::isfinite(interface_hold), "interface_hold", "must be non-negative");
  require(newton_tol > 0.0, "newton_tol", "must be positive");
  require(newton_max_iter >= 1, "newton_max_iter", "must be at least 1");
}

RobotConfig preset(std::string_view name) {
  RobotConfig c;
  if (name == "fitted_sec2") {
    c.tails = 4;
    c.c_t = 4.0;
    c.c_r = 2.06;
    c.c_yr = 6.0;
    return c;
  }
  if (name == "control_sec4") {
    // l/R = 6.875 and l/r0 = 34.375 with l = 0.11 m.
    c.tails = 2;
    c.c_t = 3.0;
    c.c_r = 2.8;
    c.c_yr = 2.0;
    return c;
  }
  throw ConfigError("preset", 0, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"fitted_sec2", "control_sec4"}; }

RobotConfig parse_config(std::string_view text) {
  std::map<std::string, std::pair<std::string, int>> values;  // "section.key" -> (value, line)
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "line " + std::to_string(line_no) + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", line_no, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    values[key] = {std::string(trim(line.substr(eq + 1))), line_no};
  }

  RobotConfig config;
  for (const auto& spec : field_table()) {
    const std::string full = std::string(spec.section) + "." + spec.key;
    auto it = values.find(full);
    if (it == values.end())
      throw ConfigError(spec.key, 0, "missing field '" + std::string(spec.key) + "' in section [" + spec.section + "]");
    const auto& [raw, line] = it->second;
    const char* first = raw.data();
    const char* last = raw.data() + raw.size();
    bool ok = false;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.*member)>;
          T value{};
          auto res = std::from_chars(first, last, value);
          ok = res.ec == std::errc() && res.ptr == last;
          if (ok) config.*member = value;
        },
        spec.member);
    if (!ok)
      throw ConfigError(spec.key, line, "line " + std::to_string(line) + ": cannot parse value '" + raw + "' for field '" + spec.key + "'");
    values.erase(it);
  }
  if (!values.empty()) {
    const auto& [key, v] = *values.begin();
    throw ConfigError(key, v.second, "line " + std::to_string(v.second) + ": unknown field '" + key + "'");
  }
  config.validate();
  return config;
}

RobotConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RobotConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& spec : field_table()) {
    if (section != spec.section) {
      if (!section.empty()) out << '\n';
      section = spec.section;
      out << '[' << section << "]\n";
    }
    out << spec.key << " = ";
    std::visit(
        [&](auto member) {
          if constexpr (std::is_same_v<decltype(member), int RobotConfig::*>)
            out << config.*member;
          else
            out << format_double(config.*member);
        },
        spec.member);
    out << '\n';
  }
  return out.str();
}

}  // namespace flagsim
