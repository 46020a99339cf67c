#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flagsim {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Adapted orthonormal triad attached to an edge. `t` is the unit edge
/// tangent; `d1`, `d2` span the cross-section with d2 = t x d1.
struct Frame {
  Vec3 t = Vec3::UnitZ();
  Vec3 d1 = Vec3::UnitX();
  Vec3 d2 = Vec3::UnitY();
};

/// Minimal rotation taking unit vector `from` onto unit vector `to`, applied
/// to `v`. For antiparallel tangents the rotation is by pi about `fallback`
/// (which must be a unit vector orthogonal to `from`).
Vec3 transport_vector(const Vec3& v, const Vec3& from, const Vec3& to, const Vec3& fallback);

/// Transports `frame` so its tangent becomes `t_new`. The antiparallel case
/// rotates by pi about the frame's own d1.
Frame parallel_transport(const Frame& frame, const Vec3& t_new);

/// Gram-Schmidt against the tangent; restores d2 = t x d1.
void reorthonormalize(Frame& frame);

/// Angle that rotates `u` onto `v` about `axis` (right-handed), in (-pi, pi].
double signed_angle(const Vec3& u, const Vec3& v, const Vec3& axis);

/// Returns `angle` shifted by a multiple of 2*pi to lie closest to `reference`.
double unwrap_near(double angle, double reference);

/// Material directors obtained by rotating (d1, d2) by `theta` about t.
inline void material_directors(const Frame& ref, double theta, Vec3& m1, Vec3& m2) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m1 = c * ref.d1 + s * ref.d2;
  m2 = -s * ref.d1 + c * ref.d2;
}

/// Largest |entry| of F^T F - I for the triad stacked as columns.
double orthonormality_error(const Frame& frame);

}  // namespace flagsim
