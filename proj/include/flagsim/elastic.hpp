#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "flagsim/config.hpp"
#include "flagsim/rod.hpp"

namespace flagsim {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// EA per edge, EI and GJ per stencil. Head and disc entries carry the
/// tail value times `rigid_multiplier`.
struct StiffnessSet {
  std::vector<double> stretch;
  std::vector<double> bend;
  std::vector<double> twist;
};

/// `tail_scale` multiplies the tail EI and GJ (junction stencils included)
/// without touching the rigid parts.
StiffnessSet make_stiffness(const RobotConfig& config, const Topology& topology, double tail_scale = 1.0);

struct ElasticTerm {
  double energy = 0.0;
  VectorXd force;  // -dE/dq, length ndof
};

/// Frame data an energy evaluation transports from: the reference frames and
/// reference twists at the last converged configuration, plus natural shape.
struct RodReference {
  const std::vector<Frame>& frames;
  const std::vector<double>& ref_twist;
  const std::vector<Vec2>& natural_curvature;
  const std::vector<double>& natural_twist;

  static RodReference of(const RobotState& state) {
    return {state.ref_frames, state.ref_twist, state.natural_curvature, state.natural_twist};
  }
};

ElasticTerm stretching_energy_force(const VectorXd& q, const Topology& topology,
                                    const StiffnessSet& stiffness);
ElasticTerm bending_energy_force(const VectorXd& q, const Topology& topology,
                                 const StiffnessSet& stiffness, const RodReference& reference);
ElasticTerm twisting_energy_force(const VectorXd& q, const Topology& topology,
                                  const StiffnessSet& stiffness, const RodReference& reference);

struct ElasticSystem {
  double energy = 0.0;
  VectorXd force;
  SparseMatrix hessian;  // d^2E/dq^2 (= -dF/dq); empty unless requested
};

/// Sum of the three modes. The stretching Hessian is analytic; bend/twist
/// blocks are central differences of the analytic stencil gradient,
/// symmetrized.
ElasticSystem total_elastic(const VectorXd& q, const Topology& topology,
                            const StiffnessSet& stiffness, const RodReference& reference,
                            bool with_hessian);

/// One bend/twist stencil in local coordinates
/// [x_prev(3), x_node(3), x_next(3), theta_in, theta_out].
using StencilVector = Eigen::Matrix<double, 11, 1>;
struct StencilEnergy {
  double bend = 0.0;
  double twist = 0.0;
  StencilVector bend_grad = StencilVector::Zero();
  StencilVector twist_grad = StencilVector::Zero();
};
StencilEnergy evaluate_stencil(const StencilVector& dofs, const Frame& base_in, const Frame& base_out,
                               double base_ref_twist, const Vec2& kappa0, double tau0,
                               double bend_stiffness, double twist_stiffness, double voronoi);

}  // namespace flagsim
