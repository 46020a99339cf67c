#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "flagsim/config.hpp"
#include "flagsim/rod.hpp"

namespace flagsim {

/// Resistive-force-theory coefficients of a slender filament (per unit
/// length, Pa s) together with the head drag prefactors.
struct DragCoefficients {
  double mu_par = 0.0;
  double mu_perp = 0.0;
  double c_t = 0.0;
  double c_r = 0.0;
  double c_yr = 0.0;

  static DragCoefficients from(const RobotConfig& config);
};

/// mu_par = 2 pi mu0 / (ln(l/r0) - 1/2), mu_perp = 4 pi mu0 / (ln(l/r0) + 1/2).
double rft_parallel(double mu0, double slenderness);
double rft_perpendicular(double mu0, double slenderness);

/// Viscosity profile across the fluid-air interface:
/// mu(y) = mu0 / (1 + exp(k (y - h) / R)).
struct InterfaceProfile {
  double h = 0.0;
  double k = 0.0;
  double mu0 = 0.0;
  double radius = 0.0;

  static InterfaceProfile from(const RobotConfig& config);
};

double viscosity_at(double y, const InterfaceProfile& profile);

/// -C_t 6 pi mu0 R v.
Vec3 head_translation_drag(const Vec3& v_head, const RobotConfig& config);

/// Horizontal unit vector perpendicular to the head axis, y_world x axis.
/// Throws GeometryError when the axis is within 1e-6 of vertical.
Vec3 lateral_direction(const Vec3& head_axis);

/// -C_yr omega_h mu0 R L e_x.
Vec3 head_lateral_force(double omega_h, const Vec3& head_axis, const RobotConfig& config);

/// -C_r 8 pi mu0 R^3 omega_h, acting on the head's twist DOF.
double head_rotation_torque(double omega_h, const RobotConfig& config);

/// -mu_par (t.v) t l_k - mu_perp (v - (t.v) t) l_k.
Vec3 rft_node_force(const Vec3& velocity, const Vec3& tangent, double voronoi_length,
                    const DragCoefficients& coeffs);

/// Dimensionless constant c with F_x = -c mu0 omega_h R L for a cylinder of
/// radius R spinning in the sigmoid profile (surface height R sin(theta)).
/// `vertical` receives the companion y-force constant, which vanishes.
struct LateralConstant {
  double lateral = 0.0;
  double vertical = 0.0;
  int evaluations = 0;
};
LateralConstant lateral_constant_oracle(const InterfaceProfile& profile, double head_length = 1.0);

/// Tangent used for RFT at each tail node (average of adjacent tail edges).
Vec3 tail_node_tangent(const VectorXd& q, const Topology& topology, int tail, int index);

/// Head spin rate: rate of theta^0 (reference frames carry no spin).
double head_spin_rate(const VectorXd& q, const VectorXd& qdot, const Topology& topology);

struct HydroSystem {
  VectorXd force;
  Eigen::SparseMatrix<double> velocity_jacobian;  // dF/dqdot at fixed geometry; empty unless requested
};

/// Hydrodynamic generalized force: RFT on tail nodes, translation drag and
/// lateral force on x1, rotation torque on theta^0. Everything else is zero.
HydroSystem assemble_hydro_forces(const VectorXd& q, const VectorXd& qdot, const Topology& topology,
                                  const RobotConfig& config, bool with_jacobian);

}  // namespace flagsim
