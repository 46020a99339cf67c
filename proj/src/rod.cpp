#include "flagsim/rod.hpp"

#include <cmath>
#include <string>

#include "flagsim/error.hpp"

namespace flagsim {

std::vector<Frame> RobotState::material_frames(const Topology& topology) const {
  std::vector<Frame> out(ref_frames.size());
  for (int e = 0; e < topology.num_edges; ++e) {
    out[e].t = ref_frames[e].t;
    material_directors(ref_frames[e], q[topology.theta_index(e)], out[e].d1, out[e].d2);
  }
  return out;
}

Vec3 edge_tangent(const VectorXd& q, const Edge& edge) {
  const Vec3 e = q.segment<3>(3 * edge.to) - q.segment<3>(3 * edge.from);
  const double len = e.norm();
  if (!(len > kMinEdgeLength))
    throw GeometryError("degenerate edge between nodes " + std::to_string(edge.from) + " and " +
                        std::to_string(edge.to));
  return e / len;
}

std::pair<RobotState, Topology> build_robot(const RobotConfig& config) {
  config.validate();
  const int n_tails = config.tails;
  const int per_tail = config.nodes_per_tail;
  const double seg = config.tail_length / (per_tail - 1);
  const double half_head = 0.5 * config.head_length;

  Topology topo;
  topo.num_nodes = 3 + n_tails * per_tail;
  topo.num_edges = 2 + n_tails + n_tails * (per_tail - 1);

  std::vector<Vec3> x;
  x.reserve(topo.num_nodes);
  x.emplace_back(0.0, 0.0, -config.head_length);
  x.emplace_back(0.0, 0.0, -half_head);
  x.emplace_back(0.0, 0.0, 0.0);
  topo.node_segment = {Segment::head, Segment::head, Segment::head};
  topo.node_voronoi = {0.0, 0.0, 0.0};

  topo.edges.push_back({0, 1, Segment::head, -1, half_head});
  topo.edges.push_back({1, 2, Segment::head, -1, half_head});

  // Attachment angles start on +y so the layout is mirror symmetric in x.
  for (int i = 0; i < n_tails; ++i) {
    const double phi = 0.5 * kPi + 2.0 * kPi * i / n_tails;
    const Vec3 root(config.spoke_length * std::cos(phi), config.spoke_length * std::sin(phi), 0.0);
    std::vector<int> nodes;
    for (int j = 0; j < per_tail; ++j) {
      nodes.push_back(static_cast<int>(x.size()));
      x.push_back(root + Vec3(0.0, 0.0, j * seg));
      topo.node_segment.push_back(Segment::tail);
      topo.node_voronoi.push_back((j == 0 || j == per_tail - 1) ? 0.5 * seg : seg);
    }
    topo.tail_nodes.push_back(nodes);
  }
  for (int i = 0; i < n_tails; ++i)
    topo.edges.push_back({2, topo.tail_nodes[i][0], Segment::disc, -1, config.spoke_length});
  for (int i = 0; i < n_tails; ++i) {
    std::vector<int> edges;
    for (int j = 0; j + 1 < per_tail; ++j) {
      edges.push_back(static_cast<int>(topo.edges.size()));
      topo.edges.push_back({topo.tail_nodes[i][j], topo.tail_nodes[i][j + 1], Segment::tail, i, seg});
    }
    topo.tail_edges.push_back(edges);
  }

  auto add_stencil = [&](int node, int in, int out) {
    const bool rigid = topo.edges[in].segment != Segment::tail || topo.edges[out].segment != Segment::tail;
    const Vec3 e = x[topo.edges[in].to] - x[topo.edges[in].from];
    const Vec3 f = x[topo.edges[out].to] - x[topo.edges[out].from];
    const double turn = std::atan2(e.cross(f).norm(), e.dot(f));
    topo.stencils.push_back(
        {node, in, out, 0.5 * (topo.edges[in].rest_length + topo.edges[out].rest_length), rigid, turn});
  };
  topo.motor_stencil = 0;
  add_stencil(1, 0, 1);
  for (int i = 0; i < n_tails; ++i) add_stencil(2, 1, 2 + i);
  for (int i = 0; i < n_tails; ++i) {
    add_stencil(topo.tail_nodes[i][0], 2 + i, topo.tail_edges[i][0]);
    for (int j = 1; j + 1 < per_tail; ++j)
      add_stencil(topo.tail_nodes[i][j], topo.tail_edges[i][j - 1], topo.tail_edges[i][j]);
  }

  RobotState state;
  state.q = VectorXd::Zero(topo.ndof());
  for (int i = 0; i < topo.num_nodes; ++i) state.q.segment<3>(3 * i) = x[i];
  state.qdot = VectorXd::Zero(topo.ndof());

  // Each outgoing edge's frame is the space-parallel transport of its parent,
  // so every reference twist starts at zero.
  state.ref_frames.resize(topo.num_edges);
  state.ref_frames[0] = Frame{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  for (int e = 1; e < topo.num_edges; ++e) {
    int parent = -1;
    for (const auto& s : topo.stencils)
      if (s.out_edge == e) parent = s.in_edge;
    state.ref_frames[e] = parallel_transport(state.ref_frames[parent], edge_tangent(state.q, topo.edges[e]));
    reorthonormalize(state.ref_frames[e]);
  }

  state.ref_twist.resize(topo.stencils.size());
  for (std::size_t s = 0; s < topo.stencils.size(); ++s)
    state.ref_twist[s] = reference_twist(state.ref_frames[topo.stencils[s].in_edge],
                                         state.ref_frames[topo.stencils[s].out_edge], 0.0);
  state.natural_curvature = stencil_curvatures(state, topo);
  state.natural_twist = stencil_twists(state, topo);
  for (std::size_t s = 0; s < topo.stencils.size(); ++s) {
    if (!topo.stencils[s].rigid) {
      state.natural_curvature[s].setZero();
      state.natural_twist[s] = 0.0;
    }
  }
  return {std::move(state), std::move(topo)};
}

void rotate_about_vertical(RobotState& state, const Topology& topology, double yaw) {
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
  const Vec3 pivot = state.node(topology.head_nodes[1]);
  for (int i = 0; i < topology.num_nodes; ++i) {
    state.q.segment<3>(3 * i) = pivot + rot * (state.node(i) - pivot);
    state.qdot.segment<3>(3 * i) = rot * state.qdot.segment<3>(3 * i);
  }
  for (auto& f : state.ref_frames) {
    f.t = rot * f.t;
    f.d1 = rot * f.d1;
    f.d2 = rot * f.d2;
  }
}

Vec3 curvature_binormal(const Vec3& e, const Vec3& f) {
  return 2.0 * e.cross(f) / (e.norm() * f.norm() + e.dot(f));
}

Vec2 curvature_at_node(const Vec3& x_prev, const Vec3& x_node, const Vec3& x_next,
                       const Vec3& m1_in, const Vec3& m2_in,
                       const Vec3& m1_out, const Vec3& m2_out) {
  const Vec3 e = x_node - x_prev;
  const Vec3 f = x_next - x_node;
  if (!(e.norm() > kMinEdgeLength) || !(f.norm() > kMinEdgeLength))
    throw GeometryError("degenerate edge in curvature evaluation");
  const Vec3 kb = curvature_binormal(e, f);
  return {0.5 * kb.dot(m2_in + m2_out), -0.5 * kb.dot(m1_in + m1_out)};
}

double reference_twist(const Frame& in, const Frame& out, double previous) {
  const Vec3 u = transport_vector(in.d1, in.t, out.t, in.d1);
  return unwrap_near(signed_angle(u, out.d1, out.t), previous);
}

FrameSet transport_frames(const VectorXd& q, const Topology& topology,
                          const std::vector<Frame>& base_frames,
                          const std::vector<double>& base_ref_twist) {
  FrameSet out;
  out.frames.resize(topology.num_edges);
  for (int e = 0; e < topology.num_edges; ++e)
    out.frames[e] = parallel_transport(base_frames[e], edge_tangent(q, topology.edges[e]));
  out.ref_twist.resize(topology.stencils.size());
  for (std::size_t s = 0; s < topology.stencils.size(); ++s) {
    const auto& st = topology.stencils[s];
    out.ref_twist[s] = reference_twist(out.frames[st.in_edge], out.frames[st.out_edge], base_ref_twist[s]);
  }
  return out;
}

void update_frames(RobotState& state, const Topology& topology) {
  auto set = transport_frames(state.q, topology, state.ref_frames, state.ref_twist);
  for (auto& f : set.frames) reorthonormalize(f);
  state.ref_frames = std::move(set.frames);
  state.ref_twist = std::move(set.ref_twist);
}

std::vector<Vec2> stencil_curvatures(const RobotState& state, const Topology& topology) {
  const auto mat = state.material_frames(topology);
  std::vector<Vec2> out;
  out.reserve(topology.stencils.size());
  for (const auto& s : topology.stencils) {
    const auto& ein = topology.edges[s.in_edge];
    const auto& eout = topology.edges[s.out_edge];
    out.push_back(curvature_at_node(state.node(ein.from), state.node(s.node), state.node(eout.to),
                                    mat[s.in_edge].d1, mat[s.in_edge].d2,
                                    mat[s.out_edge].d1, mat[s.out_edge].d2));
  }
  return out;
}

std::vector<double> stencil_twists(const RobotState& state, const Topology& topology) {
  std::vector<double> out;
  out.reserve(topology.stencils.size());
  for (std::size_t s = 0; s < topology.stencils.size(); ++s) {
    const auto& st = topology.stencils[s];
    out.push_back(twist_at_node(state.q[topology.theta_index(st.in_edge)],
                                state.q[topology.theta_index(st.out_edge)], state.ref_twist[s]));
  }
  return out;
}

}  // namespace flagsim
