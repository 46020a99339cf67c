#pragma once

#include <array>
#include <vector>

#include "flagsim/config.hpp"
#include "flagsim/geometry.hpp"

namespace flagsim {

enum class Segment { head, disc, tail };

struct Edge {
  int from = 0;
  int to = 0;
  Segment segment = Segment::tail;
  int tail = -1;             // owning tail, -1 for head/disc
  double rest_length = 0.0;  // |e-bar|
};

/// Bend/twist stencil: two edges meeting at `node`, `in_edge` ending there
/// and `out_edge` starting there. The rod graph is a tree rooted at x0, so
/// junction nodes carry one stencil per outgoing edge.
struct Stencil {
  int node = 0;
  int in_edge = 0;
  int out_edge = 0;
  double voronoi = 0.0;  // (|e-bar_in| + |e-bar_out|) / 2
  bool rigid = false;
  double rest_turn = 0.0;  // angle between the two edge tangents at rest [rad]
};

struct Topology {
  int num_nodes = 0;
  int num_edges = 0;
  std::vector<Edge> edges;
  std::vector<Stencil> stencils;
  std::vector<double> node_voronoi;  // tail nodes: tail-only Voronoi length; others: 0
  std::vector<Segment> node_segment;
  std::array<int, 3> head_nodes{0, 1, 2};
  int motor_stencil = 0;                       // stencil at x1 carrying the actuation twist
  std::vector<std::vector<int>> tail_nodes;    // root (attachment) first
  std::vector<std::vector<int>> tail_edges;

  int ndof() const { return 3 * num_nodes + num_edges; }
  int theta_index(int edge) const { return 3 * num_nodes + edge; }
};

struct RobotState {
  VectorXd q;     // [x_0 .. x_{n-1}, theta^0 .. theta^{m-1}]
  VectorXd qdot;
  std::vector<Frame> ref_frames;         // per edge, time-parallel transported
  std::vector<double> ref_twist;         // per stencil, unwrapped
  std::vector<Vec2> natural_curvature;   // per stencil, material components
  std::vector<double> natural_twist;     // per stencil
  double time = 0.0;

  Vec3 node(int i) const { return q.segment<3>(3 * i); }
  std::vector<Frame> material_frames(const Topology& topology) const;
};

/// Discretizes head (3 collinear nodes along +z), N disc spokes from the
/// shaft node x2, and N straight tails parallel to the head axis.
std::pair<RobotState, Topology> build_robot(const RobotConfig& config);

/// Rigidly rotates the whole robot by `yaw` about the vertical (+y) axis
/// through the head center node; velocities and frames rotate with it.
void rotate_about_vertical(RobotState& state, const Topology& topology, double yaw);

/// Discrete binormal curvature 2 e x f / (|e||f| + e.f).
Vec3 curvature_binormal(const Vec3& e, const Vec3& f);

/// Curvature components (kappa1, kappa2) in the averaged material frame
/// of the two edges. Throws GeometryError for an edge shorter than 1e-12 m.
Vec2 curvature_at_node(const Vec3& x_prev, const Vec3& x_node, const Vec3& x_next,
                       const Vec3& m1_in, const Vec3& m2_in,
                       const Vec3& m1_out, const Vec3& m2_out);

inline double twist_at_node(double theta_in, double theta_out, double ref_twist) {
  return theta_out - theta_in + ref_twist;
}

/// Reference twist at a stencil: angle from the space-transported d1 of the
/// incoming edge to d1 of the outgoing edge, unwrapped near `previous`.
double reference_twist(const Frame& in, const Frame& out, double previous);

/// Frames and reference twists at configuration `q`, obtained by transporting
/// `base_frames` from their tangents to the tangents of `q`.
struct FrameSet {
  std::vector<Frame> frames;
  std::vector<double> ref_twist;
};
FrameSet transport_frames(const VectorXd& q, const Topology& topology,
                          const std::vector<Frame>& base_frames,
                          const std::vector<double>& base_ref_twist);

/// Moves the state's reference frames and twists to the current q.
void update_frames(RobotState& state, const Topology& topology);

/// Material-frame curvatures and twists at every stencil for the current state.
std::vector<Vec2> stencil_curvatures(const RobotState& state, const Topology& topology);
std::vector<double> stencil_twists(const RobotState& state, const Topology& topology);

/// Unit tangent of an edge at configuration q; throws on degenerate edges.
Vec3 edge_tangent(const VectorXd& q, const Edge& edge);

inline constexpr double kMinEdgeLength = 1e-12;

}  // namespace flagsim
