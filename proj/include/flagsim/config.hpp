#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flagsim {

/// Geometry, material, fluid and numerical parameters of one robot. All
/// quantities are SI. The defaults describe the glycerin robot with the
/// fitted drag prefactors (see `preset`).
struct RobotConfig {
  int tails = 4;
  double tail_length = 0.11;     // l [m]
  double tail_radius = 3.2e-3;   // r0 [m]
  double head_radius = 0.016;    // R [m]
  double head_length = 0.06;     // L [m]
  double spoke_length = 0.016;   // disc lever arm from shaft to tail root [m]

  double youngs_modulus = 1.2e6;       // E [Pa]
  double shear_modulus = 1.2e6 / 3.0;  // G [Pa]
  double mu0 = 1.49;                   // bulk viscosity [Pa s]

  double c_t = 4.0;
  double c_r = 2.06;
  double c_yr = 6.0;

  // Sigmoid viscosity profile near the interface; only the lateral-force
  // quadrature uses it, stepping uses the lumped c_yr.
  double interface_h = 0.7 * 0.016;  // [m]
  double interface_k = 20.0;

  int nodes_per_tail = 11;
  double dt = 0.0;  // [s]; <= 0 selects 1e-3 of the intrinsic time scale
  double rigid_multiplier = 1e4;
  double rho_line = 4.0e-4;   // [kg/m]
  double head_mass = 6.0e-4;  // [kg]

  // Optional vertical spring on the head nodes in units of EI / l^3, standing
  // in for the trim that keeps the real robot at the surface. 0 disables it.
  double interface_hold = 0.0;

  double newton_tol = 1e-6;  // relative to EI / l^2
  int newton_max_iter = 50;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  double bending_stiffness() const;  // EI of one tail
  double time_scale() const;         // mu0 l^4 / EI
  double time_step() const;          // dt, resolving the automatic default
  double force_scale() const;        // EI / l^2

  /// Sets G = E / 3 (near-incompressible material).
  void set_incompressible_shear() { shear_modulus = youngs_modulus / 3.0; }
};

/// Named parameter sets: "fitted_sec2" (N = 4, C = 4.0/2.06/6.0) and
/// "control_sec4" (N = 2, C = 3.0/2.8/2.0). Throws ConfigError otherwise.
RobotConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Flat sectioned key = value text. Every key is required on read.
RobotConfig parse_config(std::string_view text);
RobotConfig load_config(const std::string& path);
std::string serialize_config(const RobotConfig& config);

}  // namespace flagsim
