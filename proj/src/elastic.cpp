#include "flagsim/elastic.hpp"

#include <array>
#include <cmath>

#include "flagsim/error.hpp"

namespace flagsim {
namespace {

std::array<int, 11> stencil_indices(const Topology& topo, const Stencil& s) {
  const int a = topo.edges[s.in_edge].from;
  const int c = topo.edges[s.out_edge].to;
  return {3 * a,     3 * a + 1,      3 * a + 2,      3 * s.node, 3 * s.node + 1, 3 * s.node + 2,
          3 * c,     3 * c + 1,      3 * c + 2,      topo.theta_index(s.in_edge),
          topo.theta_index(s.out_edge)};
}

StencilVector gather(const VectorXd& q, const std::array<int, 11>& idx) {
  StencilVector local;
  for (int i = 0; i < 11; ++i) local[i] = q[idx[i]];
  return local;
}

template <class Fn>
void for_each_stencil(const VectorXd& q, const Topology& topo, const StiffnessSet& k,
                      const RodReference& ref, Fn&& fn) {
  for (std::size_t s = 0; s < topo.stencils.size(); ++s) {
    const auto& st = topo.stencils[s];
    const auto idx = stencil_indices(topo, st);
    const StencilVector local = gather(q, idx);
    fn(s, idx, local,
       [&](const StencilVector& dofs) {
         return evaluate_stencil(dofs, ref.frames[st.in_edge], ref.frames[st.out_edge], ref.ref_twist[s],
                                 ref.natural_curvature[s], ref.natural_twist[s], k.bend[s], k.twist[s],
                                 st.voronoi);
       });
  }
}

}  // namespace

StiffnessSet make_stiffness(const RobotConfig& config, const Topology& topology, double tail_scale) {
  const double r2 = config.tail_radius * config.tail_radius;
  const double ea = config.youngs_modulus * kPi * r2;
  const double ei = kPi * config.youngs_modulus * r2 * r2 / 4.0;
  const double gj = kPi * config.shear_modulus * r2 * r2 / 2.0;
  StiffnessSet k;
  for (const auto& e : topology.edges)
    k.stretch.push_back(e.segment == Segment::tail ? ea : ea * config.rigid_multiplier);
  // A stencil's Voronoi region is half of each adjacent edge. The halves act
  // in series, so a disc-to-tail junction is as compliant as the tail half.
  auto series = [&](const Stencil& s, double tail_value) {
    double compliance = 0.0;
    for (int e : {s.in_edge, s.out_edge}) {
      const Edge& edge = topology.edges[e];
      const double value =
          edge.segment == Segment::tail ? tail_value * tail_scale : tail_value * config.rigid_multiplier;
      compliance += 0.5 * edge.rest_length / value;
    }
    return s.voronoi / compliance;
  };
  for (const auto& s : topology.stencils) {
    const bool mixed = s.rigid && (topology.edges[s.in_edge].segment == Segment::tail ||
                                   topology.edges[s.out_edge].segment == Segment::tail);
    // About a rest turn phi0 the curvature 2 tan(phi / 2) changes at
    // sec^2(phi0 / 2) per radian of bend.
    const double half_angle = mixed ? std::pow(std::cos(0.5 * s.rest_turn), 4) : 1.0;
    k.bend.push_back(series(s, ei) * half_angle);
    k.twist.push_back(series(s, gj));
  }
  return k;
}

StencilEnergy evaluate_stencil(const StencilVector& dofs, const Frame& base_in, const Frame& base_out,
                               double base_ref_twist, const Vec2& kappa0, double tau0,
                               double bend_stiffness, double twist_stiffness, double voronoi) {
  const Vec3 xa = dofs.segment<3>(0);
  const Vec3 xb = dofs.segment<3>(3);
  const Vec3 xc = dofs.segment<3>(6);
  const Vec3 e = xb - xa;
  const Vec3 f = xc - xb;
  const double len_e = e.norm();
  const double len_f = f.norm();
  if (!(len_e > kMinEdgeLength) || !(len_f > kMinEdgeLength))
    throw GeometryError("degenerate edge in bend/twist stencil");
  const Vec3 te = e / len_e;
  const Vec3 tf = f / len_f;

  const Frame fe = parallel_transport(base_in, te);
  const Frame ff = parallel_transport(base_out, tf);
  Vec3 m1e, m2e, m1f, m2f;
  material_directors(fe, dofs[9], m1e, m2e);
  material_directors(ff, dofs[10], m1f, m2f);

  const double chi = 1.0 + te.dot(tf);
  if (!(chi > 1e-10)) throw GeometryError("stencil folded back on itself");
  const Vec3 kb = 2.0 * te.cross(tf) / chi;
  const double kappa1 = 0.5 * kb.dot(m2e + m2f);
  const double kappa2 = -0.5 * kb.dot(m1e + m1f);
  const Vec3 tilde_t = (te + tf) / chi;
  const Vec3 tilde_d1 = (m1e + m1f) / chi;
  const Vec3 tilde_d2 = (m2e + m2f) / chi;

  const Vec3 dk1_de = (-kappa1 * tilde_t + tf.cross(tilde_d2)) / len_e;
  const Vec3 dk1_df = (-kappa1 * tilde_t - te.cross(tilde_d2)) / len_f;
  const Vec3 dk2_de = (-kappa2 * tilde_t - tf.cross(tilde_d1)) / len_e;
  const Vec3 dk2_df = (-kappa2 * tilde_t + te.cross(tilde_d1)) / len_f;

  // Reference directors are transported from the base tangents, so a change
  // of tangent also spins them about t by the holonomy angle h . dt.
  const Vec3 he = te.cross(base_in.t) / ((1.0 + base_in.t.dot(te)) * len_e);
  const Vec3 hf = tf.cross(base_out.t) / ((1.0 + base_out.t.dot(tf)) * len_f);
  const Vec3 gk1_e = dk1_de - 0.5 * kb.dot(m1e) * he;
  const Vec3 gk1_f = dk1_df - 0.5 * kb.dot(m1f) * hf;
  const Vec3 gk2_e = dk2_de - 0.5 * kb.dot(m2e) * he;
  const Vec3 gk2_f = dk2_df - 0.5 * kb.dot(m2f) * hf;

  StencilVector grad_k1, grad_k2;
  grad_k1 << -gk1_e, gk1_e - gk1_f, gk1_f, -0.5 * kb.dot(m1e), -0.5 * kb.dot(m1f);
  grad_k2 << -gk2_e, gk2_e - gk2_f, gk2_f, -0.5 * kb.dot(m2e), -0.5 * kb.dot(m2f);

  StencilEnergy out;
  const double dk1 = kappa1 - kappa0[0];
  const double dk2 = kappa2 - kappa0[1];
  out.bend = 0.5 * bend_stiffness * (dk1 * dk1 + dk2 * dk2) / voronoi;
  out.bend_grad = (bend_stiffness / voronoi) * (dk1 * grad_k1 + dk2 * grad_k2);

  const double ref_twist = reference_twist(fe, ff, base_ref_twist);
  const double tau = twist_at_node(dofs[9], dofs[10], ref_twist);
  StencilVector grad_tau;
  const Vec3 gte = 0.5 * kb / len_e - he;
  const Vec3 gtf = 0.5 * kb / len_f + hf;
  grad_tau << -gte, gte - gtf, gtf, -1.0, 1.0;
  const double dtau = tau - tau0;
  out.twist = 0.5 * twist_stiffness * dtau * dtau / voronoi;
  out.twist_grad = (twist_stiffness / voronoi) * dtau * grad_tau;
  return out;
}

ElasticTerm stretching_energy_force(const VectorXd& q, const Topology& topology,
                                    const StiffnessSet& stiffness) {
  ElasticTerm out;
  out.force = VectorXd::Zero(q.size());
  for (int i = 0; i < topology.num_edges; ++i) {
    const auto& edge = topology.edges[i];
    const Vec3 e = q.segment<3>(3 * edge.to) - q.segment<3>(3 * edge.from);
    const double len = e.norm();
    if (!(len > kMinEdgeLength)) throw GeometryError("degenerate edge in stretching");
    const double strain = len / edge.rest_length - 1.0;
    out.energy += 0.5 * stiffness.stretch[i] * strain * strain * edge.rest_length;
    const Vec3 g = stiffness.stretch[i] * strain * (e / len);
    out.force.segment<3>(3 * edge.to) -= g;
    out.force.segment<3>(3 * edge.from) += g;
  }
  return out;
}

ElasticTerm bending_energy_force(const VectorXd& q, const Topology& topology,
                                 const StiffnessSet& stiffness, const RodReference& reference) {
  ElasticTerm out;
  out.force = VectorXd::Zero(q.size());
  for_each_stencil(q, topology, stiffness, reference, [&](std::size_t, const auto& idx, const auto& local, auto eval) {
    const auto r = eval(local);
    out.energy += r.bend;
    for (int i = 0; i < 11; ++i) out.force[idx[i]] -= r.bend_grad[i];
  });
  return out;
}

ElasticTerm twisting_energy_force(const VectorXd& q, const Topology& topology,
                                  const StiffnessSet& stiffness, const RodReference& reference) {
  ElasticTerm out;
  out.force = VectorXd::Zero(q.size());
  for_each_stencil(q, topology, stiffness, reference, [&](std::size_t, const auto& idx, const auto& local, auto eval) {
    const auto r = eval(local);
    out.energy += r.twist;
    for (int i = 0; i < 11; ++i) out.force[idx[i]] -= r.twist_grad[i];
  });
  return out;
}

ElasticSystem total_elastic(const VectorXd& q, const Topology& topology,
                            const StiffnessSet& stiffness, const RodReference& reference,
                            bool with_hessian) {
  ElasticSystem out;
  auto stretch = stretching_energy_force(q, topology, stiffness);
  out.energy = stretch.energy;
  out.force = std::move(stretch.force);

  std::vector<Eigen::Triplet<double>> triplets;
  if (with_hessian) {
    triplets.reserve(topology.num_edges * 36 + topology.stencils.size() * 121);
    for (int i = 0; i < topology.num_edges; ++i) {
      const auto& edge = topology.edges[i];
      const Vec3 e = q.segment<3>(3 * edge.to) - q.segment<3>(3 * edge.from);
      const double len = e.norm();
      const Vec3 t = e / len;
      const double ea = stiffness.stretch[i];
      const Eigen::Matrix3d block = ea * (t * t.transpose() / edge.rest_length +
                                          (1.0 / edge.rest_length - 1.0 / len) *
                                              (Eigen::Matrix3d::Identity() - t * t.transpose()));
      const int ia = 3 * edge.from;
      const int ib = 3 * edge.to;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          triplets.emplace_back(ia + r, ia + c, block(r, c));
          triplets.emplace_back(ib + r, ib + c, block(r, c));
          triplets.emplace_back(ia + r, ib + c, -block(r, c));
          triplets.emplace_back(ib + r, ia + c, -block(r, c));
        }
    }
  }

  for_each_stencil(q, topology, stiffness, reference, [&](std::size_t s, const auto& idx, const auto& local, auto eval) {
    const auto r = eval(local);
    out.energy += r.bend + r.twist;
    const StencilVector grad = r.bend_grad + r.twist_grad;
    for (int i = 0; i < 11; ++i) out.force[idx[i]] -= grad[i];
    if (!with_hessian) return;

    const auto& st = topology.stencils[s];
    const double scale = std::min(topology.edges[st.in_edge].rest_length, topology.edges[st.out_edge].rest_length);
    Eigen::Matrix<double, 11, 11> h;
    for (int j = 0; j < 11; ++j) {
      const double step = 1e-6 * (j < 9 ? scale : 1.0);
      StencilVector plus = local, minus = local;
      plus[j] += step;
      minus[j] -= step;
      const auto rp = eval(plus);
      const auto rm = eval(minus);
      h.col(j) = ((rp.bend_grad + rp.twist_grad) - (rm.bend_grad + rm.twist_grad)) / (2.0 * step);
    }
    h = 0.5 * (h + h.transpose()).eval();
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 11; ++c)
        triplets.emplace_back(idx[r], idx[c], h(r, c));
  });

  if (with_hessian) {
    out.hessian.resize(q.size(), q.size());
    out.hessian.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

}  // namespace flagsim
