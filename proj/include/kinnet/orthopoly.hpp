#pragma once

#include <Eigen/Dense>

#include "kinnet/errors.hpp"

namespace kinnet {

enum class Family { Legendre, Hermite };

const char* family_name(Family family);

/// Orthonormal polynomial family with three-term recursion
///   v P_k = alpha_{k+1} P_{k+1} + alpha_k P_{k-1},  P_{-1} = 0.
///
/// Legendre: orthonormal on [-1,1] w.r.t. dv, alpha_k = k/sqrt((2k-1)(2k+1)).
/// Hermite:  orthonormal on R w.r.t. exp(-v^2) dv, alpha_k = sqrt(k/2).
struct OrthonormalBasis {
  Family family = Family::Legendre;
  int max_degree = 0;          // K
  Eigen::VectorXd alpha;       // alpha[k-1] = alpha_k, k = 1..K
  double wave_speed = 0.0;     // a, the limiting wave speed (alpha_1 resp. 1)
  double p0 = 0.0;             // value of the constant polynomial P_0
};

/// Recursion coefficient alpha_k, closed form. k >= 1.
double alpha_coeff(Family family, int k);

/// alpha_1..alpha_K as a vector. K >= 1.
Eigen::VectorXd recursion_coeffs(Family family, int max_degree);

OrthonormalBasis make_basis(Family family, int max_degree);

/// P_k(v) by forward recursion, 0 <= k <= max_degree + 1.
double eval_poly(const OrthonormalBasis& basis, int k, double v);

/// P_0(v)..P_K(v).
Eigen::VectorXd eval_poly_all(const OrthonormalBasis& basis, int max_degree,
                              double v);

/// Weighted basis functions psi_k = P_k * sqrt(weight function):
/// Legendre psi_k = P_k, Hermite psi_k(v) = P_k(v) exp(-v^2/2).
/// These stay O(1) where the bare Hermite values overflow.
Eigen::VectorXd eval_weighted_all(const OrthonormalBasis& basis,
                                  int max_degree, double v);

/// Integral of the family's weight function (2 for Legendre, sqrt(pi) for
/// Hermite); equals the sum of the Gauss weights.
double weight_integral(Family family);

/// Symmetric Gauss rule with 2N nodes. Nodes are the eigenvalues of the
/// Jacobi matrix; weights from the first eigenvector components (small
/// rules) or the Christoffel sums (large rules). Node/weight symmetry is
/// enforced exactly after construction.
struct QuadratureRule {
  int n_nodes = 0;             // 2N
  Eigen::VectorXd nodes;       // ascending, v_{N} < 0 < v_{N+1}
  Eigen::VectorXd weights;     // positive, sum = weight_integral(family)
  // Tail-compensated weights w_i * exp(v_i^2) for Hermite (equal to
  // `weights` for Legendre). These pair with the psi_k and remain
  // representable at sizes where the bare weights underflow.
  Eigen::VectorXd weights_mod;

  int half() const { return n_nodes / 2; }
  int mirror(int i) const { return n_nodes - 1 - i; }
};

QuadratureRule gauss_rule(Family family, int n_nodes);

}  // namespace kinnet
