#include "flagsim/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "flagsim/error.hpp"

namespace flagsim {

double rft_parallel(double mu0, double slenderness) {
  return 2.0 * kPi * mu0 / (std::log(slenderness) - 0.5);
}

double rft_perpendicular(double mu0, double slenderness) {
  return 4.0 * kPi * mu0 / (std::log(slenderness) + 0.5);
}

DragCoefficients DragCoefficients::from(const RobotConfig& config) {
  const double s = config.tail_length / config.tail_radius;
  return {rft_parallel(config.mu0, s), rft_perpendicular(config.mu0, s), config.c_t, config.c_r, config.c_yr};
}

InterfaceProfile InterfaceProfile::from(const RobotConfig& config) {
  return {config.interface_h, config.interface_k, config.mu0, config.head_radius};
}

double viscosity_at(double y, const InterfaceProfile& p) {
  const double arg = std::clamp(p.k * (y - p.h) / p.radius, -700.0, 700.0);
  return p.mu0 / (1.0 + std::exp(arg));
}

Vec3 head_translation_drag(const Vec3& v_head, const RobotConfig& config) {
  return -config.c_t * 6.0 * kPi * config.mu0 * config.head_radius * v_head;
}

Vec3 lateral_direction(const Vec3& head_axis) {
  const Vec3 ex = Vec3::UnitY().cross(head_axis);
  const double n = ex.norm();
  if (n < 1e-6) throw GeometryError("head axis is vertical; lateral direction undefined");
  return ex / n;
}

Vec3 head_lateral_force(double omega_h, const Vec3& head_axis, const RobotConfig& config) {
  if (omega_h == 0.0) return Vec3::Zero();
  return -config.c_yr * omega_h * config.mu0 * config.head_radius * config.head_length *
         lateral_direction(head_axis);
}

double head_rotation_torque(double omega_h, const RobotConfig& config) {
  return -config.c_r * 8.0 * kPi * omega_h * config.mu0 * std::pow(config.head_radius, 3);
}

Vec3 rft_node_force(const Vec3& velocity, const Vec3& tangent, double voronoi_length,
                    const DragCoefficients& coeffs) {
  const Vec3 v_par = tangent.dot(velocity) * tangent;
  return -(coeffs.mu_par * v_par + coeffs.mu_perp * (velocity - v_par)) * voronoi_length;
}

namespace {

// Adaptive Gauss-Kronrod (7-15) on [a, b]; returns integral, counts evaluations.
double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol, int depth,
                     int& evals) {
  static constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                    0.207784955007898467600689403773245, 0.0};
  static constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kronrod = wgk[7] * f(c);
  double gauss = wg[3] * f(c);
  evals += 1;
  for (int i = 0; i < 7; ++i) {
    const double f1 = f(c - h * xgk[i]);
    const double f2 = f(c + h * xgk[i]);
    evals += 2;
    kronrod += wgk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += wg[i / 2] * (f1 + f2);
  }
  kronrod *= h;
  gauss *= h;
  if (std::abs(kronrod - gauss) <= tol || depth <= 0) {
    if (std::abs(kronrod - gauss) > tol) throw Error("lateral-force quadrature did not converge");
    return kronrod;
  }
  return gauss_kronrod(f, a, c, 0.5 * tol, depth - 1, evals) + gauss_kronrod(f, c, b, 0.5 * tol, depth - 1, evals);
}

}  // namespace

LateralConstant lateral_constant_oracle(const InterfaceProfile& profile, double head_length) {
  // Surface element R dtheta dz at height y = R sin(theta); the z-integral is
  // the factor L, divided out together with mu0 R L.
  const double R = profile.radius;
  auto fx = [&](double th) { return viscosity_at(R * std::sin(th), profile) * std::sin(th) * R; };
  auto fy = [&](double th) { return viscosity_at(R * std::sin(th), profile) * std::cos(th) * R; };
  LateralConstant out;
  const double norm = profile.mu0 * R * head_length;
  // Tolerances in integrand units; both integrals are O(mu0 R).
  const double tol = 1e-9 * profile.mu0 * R;
  const double ix = head_length * gauss_kronrod(fx, 0.0, 2.0 * kPi, tol, 30, out.evaluations);
  const double iy = head_length * gauss_kronrod(fy, 0.0, 2.0 * kPi, tol, 30, out.evaluations);
  out.lateral = -ix / norm;
  out.vertical = -iy / norm;
  return out;
}

Vec3 tail_node_tangent(const VectorXd& q, const Topology& topology, int tail, int index) {
  const auto& edges = topology.tail_edges[tail];
  const int last = static_cast<int>(edges.size());
  if (index == 0) return edge_tangent(q, topology.edges[edges[0]]);
  if (index == last) return edge_tangent(q, topology.edges[edges[last - 1]]);
  const Vec3 t = edge_tangent(q, topology.edges[edges[index - 1]]) + edge_tangent(q, topology.edges[edges[index]]);
  return t.normalized();
}

double head_spin_rate(const VectorXd&, const VectorXd& qdot, const Topology& topology) {
  return qdot[topology.theta_index(0)];
}

HydroSystem assemble_hydro_forces(const VectorXd& q, const VectorXd& qdot, const Topology& topology,
                                  const RobotConfig& config, bool with_jacobian) {
  const auto coeffs = DragCoefficients::from(config);
  HydroSystem out;
  out.force = VectorXd::Zero(q.size());
  std::vector<Eigen::Triplet<double>> triplets;

  for (std::size_t tail = 0; tail < topology.tail_nodes.size(); ++tail) {
    const auto& nodes = topology.tail_nodes[tail];
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const int node = nodes[j];
      const Vec3 t = tail_node_tangent(q, topology, static_cast<int>(tail), static_cast<int>(j));
      const double lk = topology.node_voronoi[node];
      out.force.segment<3>(3 * node) += rft_node_force(qdot.segment<3>(3 * node), t, lk, coeffs);
      if (with_jacobian) {
        const Eigen::Matrix3d tt = t * t.transpose();
        const Eigen::Matrix3d c = -lk * (coeffs.mu_par * tt + coeffs.mu_perp * (Eigen::Matrix3d::Identity() - tt));
        for (int r = 0; r < 3; ++r)
          for (int k = 0; k < 3; ++k) triplets.emplace_back(3 * node + r, 3 * node + k, c(r, k));
      }
    }
  }

  const int head = topology.head_nodes[1];
  const int theta0 = topology.theta_index(0);
  const double omega_h = head_spin_rate(q, qdot, topology);
  const Vec3 axis = edge_tangent(q, topology.edges[0]);
  out.force.segment<3>(3 * head) += head_translation_drag(qdot.segment<3>(3 * head), config);
  out.force.segment<3>(3 * head) += head_lateral_force(omega_h, axis, config);
  out.force[theta0] += head_rotation_torque(omega_h, config);

  if (with_jacobian) {
    const double ct = config.c_t * 6.0 * kPi * config.mu0 * config.head_radius;
    for (int r = 0; r < 3; ++r) triplets.emplace_back(3 * head + r, 3 * head + r, -ct);
    const Vec3 lat = -config.c_yr * config.mu0 * config.head_radius * config.head_length * lateral_direction(axis);
    for (int r = 0; r < 3; ++r) triplets.emplace_back(3 * head + r, theta0, lat[r]);
    triplets.emplace_back(theta0, theta0, head_rotation_torque(1.0, config));
    out.velocity_jacobian.resize(q.size(), q.size());
    out.velocity_jacobian.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

}  // namespace flagsim
