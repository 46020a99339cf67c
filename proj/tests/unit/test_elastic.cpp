#include <doctest.h>

#include <cmath>
#include <random>

#include "flagsim/config.hpp"
#include "flagsim/elastic.hpp"
#include "flagsim/rod.hpp"

using namespace flagsim;

namespace {

struct Fixture {
  RobotConfig config;
  RobotState state;
  Topology topology;
  StiffnessSet stiffness;

  Fixture() : config(preset("fitted_sec2")) {
    config.nodes_per_tail = 5;
    auto built = build_robot(config);
    state = std::move(built.first);
    topology = std::move(built.second);
    stiffness = make_stiffness(config, topology);
  }
};

VectorXd numeric_force(const VectorXd& q, const Fixture& f, const RodReference& ref, double h) {
  VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    VectorXd a = q, b = q;
    a[i] += h;
    b[i] -= h;
    const double ea = total_elastic(a, f.topology, f.stiffness, ref, false).energy;
    const double eb = total_elastic(b, f.topology, f.stiffness, ref, false).energy;
    out[i] = -(ea - eb) / (2 * h);
  }
  return out;
}

}  // namespace

TEST_CASE("robot topology") {
  Fixture f;
  CHECK(f.topology.num_nodes == 3 + 4 * 5);
  CHECK(f.topology.tail_nodes.size() == 4);
  CHECK(f.topology.ndof() == 3 * f.topology.num_nodes + f.topology.num_edges);
  for (const auto& e : f.topology.edges) CHECK(e.rest_length > 0.0);
}

TEST_CASE("rest state is stress-free") {
  Fixture f;
  const auto sys = total_elastic(f.state.q, f.topology, f.stiffness, RodReference::of(f.state), true);
  CHECK(sys.energy < 1e-20);
  CHECK(sys.force.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("elastic forces match finite differences of the energy") {
  Fixture f;
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double scale = f.config.tail_length / 10.0;
  for (auto& k : f.state.natural_curvature) k = Vec2(noise(rng), noise(rng)) * 2.0;
  for (auto& t : f.state.natural_twist) t = noise(rng);
  for (int trial = 0; trial < 5; ++trial) {
    VectorXd q = f.state.q;
    for (int i = 0; i < 3 * f.topology.num_nodes; ++i) q[i] += 0.05 * scale * noise(rng);
    for (int e = 0; e < f.topology.num_edges; ++e) q[f.topology.theta_index(e)] += 0.2 * noise(rng);
    const auto ref = RodReference::of(f.state);
    const auto sys = total_elastic(q, f.topology, f.stiffness, ref, false);
    const VectorXd fd = numeric_force(q, f, ref, 1e-7 * scale);
    CHECK((sys.force - fd).norm() / sys.force.norm() < 1e-5);
  }
}

TEST_CASE("Hessian is symmetric and consistent with the force") {
  Fixture f;
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 1e-3);
  VectorXd q = f.state.q;
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += noise(rng);
  const auto ref = RodReference::of(f.state);
  const auto sys = total_elastic(q, f.topology, f.stiffness, ref, true);
  const Eigen::MatrixXd H(sys.hessian);
  CHECK((H - H.transpose()).norm() / H.norm() < 1e-12);
  VectorXd dq = VectorXd::Zero(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) dq[i] = noise(rng) * 1e-3;
  const auto plus = total_elastic(q + dq, f.topology, f.stiffness, ref, false);
  const auto minus = total_elastic(q - dq, f.topology, f.stiffness, ref, false);
  const VectorXd predicted = -H * dq;
  const VectorXd actual = 0.5 * (plus.force - minus.force);
  CHECK((predicted - actual).norm() / actual.norm() < 1e-3);
}

TEST_CASE("stencil stiffness combines the two half-edges in series") {
  Fixture f;
  const double ei = f.stiffness.bend[f.topology.stencils.size() - 1];
  for (std::size_t s = 0; s < f.topology.stencils.size(); ++s) {
    const auto& st = f.topology.stencils[s];
    const auto& in = f.topology.edges[st.in_edge];
    const auto& out = f.topology.edges[st.out_edge];
    const bool tail_in = in.segment == Segment::tail;
    const bool tail_out = out.segment == Segment::tail;
    if (tail_in && tail_out) {
      CHECK(f.stiffness.bend[s] == doctest::Approx(ei));
    } else if (!tail_in && !tail_out) {
      CHECK(f.stiffness.bend[s] == doctest::Approx(ei * f.config.rigid_multiplier));
    } else {
      const double tail_half = 0.5 * (tail_in ? in : out).rest_length;
      const double c = std::cos(0.5 * st.rest_turn);
      CHECK(st.rest_turn == doctest::Approx(kPi / 2));
      CHECK(f.stiffness.bend[s] == doctest::Approx(ei * st.voronoi / tail_half * c * c * c * c).epsilon(1e-3));
      CHECK(f.stiffness.twist[s] / f.stiffness.twist.back() == doctest::Approx(st.voronoi / tail_half).epsilon(1e-3));
    }
  }
}
