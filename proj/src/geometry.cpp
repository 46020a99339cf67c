#include "flagsim/geometry.hpp"

#include <cmath>

namespace flagsim {

Vec3 transport_vector(const Vec3& v, const Vec3& from, const Vec3& to, const Vec3& fallback) {
  const double c = from.dot(to);
  const Vec3 b = from.cross(to);
  if (c > -1.0 + 1e-12) {
    // Rodrigues with unnormalized axis b = from x to, |b| = sin(phi).
    return c * v + b.cross(v) + b * (b.dot(v) / (1.0 + c));
  }
  // Half-turn about the fallback axis.
  return 2.0 * fallback.dot(v) * fallback - v;
}

Frame parallel_transport(const Frame& frame, const Vec3& t_new) {
  Vec3 axis = frame.d1 - frame.d1.dot(frame.t) * frame.t;
  axis.normalize();
  Frame out;
  out.t = t_new;
  out.d1 = transport_vector(frame.d1, frame.t, t_new, axis);
  out.d2 = transport_vector(frame.d2, frame.t, t_new, axis);
  return out;
}

void reorthonormalize(Frame& frame) {
  frame.t.normalize();
  frame.d1 -= frame.d1.dot(frame.t) * frame.t;
  frame.d1.normalize();
  frame.d2 = frame.t.cross(frame.d1);
}

double signed_angle(const Vec3& u, const Vec3& v, const Vec3& axis) {
  return std::atan2(u.cross(v).dot(axis), u.dot(v));
}

double unwrap_near(double angle, double reference) {
  return angle + 2.0 * kPi * std::round((reference - angle) / (2.0 * kPi));
}

double orthonormality_error(const Frame& frame) {
  Eigen::Matrix3d f;
  f.col(0) = frame.t;
  f.col(1) = frame.d1;
  f.col(2) = frame.d2;
  return (f.transpose() * f - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace flagsim
