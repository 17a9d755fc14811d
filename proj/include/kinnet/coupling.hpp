#pragma once

#include <Eigen/Dense>

#include "kinnet/layer.hpp"
#include "kinnet/orthopoly.hpp"

namespace kinnet {

enum class ApproxMethod { HalfFlux, HalfMoment };

/// Closed-form approximations of the coupling coefficient delta.
/// The infinite-degree case returns the analytic limit.
double approx_delta(Family family, NodeDegree degree, ApproxMethod method);

/// Coupling system for the wave equation at a node with n edges:
/// flux balance, equality of rho + delta q across edges, and the outgoing
/// characteristics, assembled as matrix_b * (rho_1..rho_n, q_1..q_n)^T = b
/// with b = (0,...,0, r_minus^1..r_minus^n)^T.
struct MacroCoupling {
  int n_edges = 0;
  double wave_speed = 0.0;
  double delta = 0.0;
  Eigen::MatrixXd matrix_b;  // 2n x 2n
};

MacroCoupling make_macro_coupling(int n_edges, double wave_speed, double delta);

struct MacroNodeSolution {
  Eigen::VectorXd rho;  // rho_i(0)
  Eigen::VectorXd q;    // q_i(0)
};

/// Solves the node system; throws numerical_error when delta = -1/a makes
/// it singular. Flux balance and invariant equality are verified post hoc.
MacroNodeSolution macro_node_solve(int n_edges, double wave_speed,
                                   double delta,
                                   const Eigen::VectorXd& r_minus);

}  // namespace kinnet
