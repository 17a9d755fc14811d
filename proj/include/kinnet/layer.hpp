#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kinnet/numerics.hpp"
#include "kinnet/orthopoly.hpp"

namespace kinnet {

/// Number of edges meeting the node, or the infinite-degree limit.
struct NodeDegree {
  int n = 0;
  bool infinite = false;

  static NodeDegree finite(int n_edges);
  static NodeDegree unbounded();
  std::string label() const;  // "2", "3", ... or "inf"
};

/// Discrete half-space layer operator at a node, in moment coordinates.
///
/// The stationary layer ODE for the non-conserved moments g = (g_2..g_{2N-1})
/// reads  A22 g' = -g  with A22 the zero-diagonal symmetric tridiagonal
/// matrix built from alpha_3..alpha_{2N-1}. Bounded solutions live on the
/// span of the eigenvectors with positive eigenvalue (stable modes, N-1 of
/// them). The boundary trace in moment variables is G(0) = T (D, C, gamma)^T
/// where D and C are the conserved density/flux invariants and gamma the
/// stable-mode coefficients.
struct LayerOperator {
  OrthonormalBasis basis;
  QuadratureRule rule;
  NodeDegree degree;
  int half_n = 0;  // N: number of positive velocities

  SymTridiag a22;
  Eigen::VectorXd lambda_plus;  // N-1 positive eigenvalues, ascending
  Eigen::MatrixXd r2_plus;      // 2(N-1) x (N-1), matching stable modes

  /// Balanced moment transform: s_balanced(k,i) = sqrt(w~_i) psi_k(v_i).
  /// Orthogonal by discrete orthonormality; the bare Vandermonde matrix is
  /// s_balanced * diag(1/sqrt(w~)) and is never formed.
  Eigen::MatrixXd s_balanced;

  Eigen::MatrixXd t_matrix;  // 2N x (N+1)

  /// Node coupling operators acting on velocity traces (N x 2N):
  /// row r of b1 pairs the mirror velocities (N-1-r, N+r) with gains
  /// (1, -1); b2 uses gains (1, n-1), or (0, 1) in the infinite limit.
  Eigen::MatrixXd b1() const;
  Eigen::MatrixXd b2() const;

  /// B2 applied to the row-equilibrated trace map S^{-1} T. Row i of
  /// S^{-1} T equals sqrt(w_i) times row i of s_balanced^T T, and mirror
  /// rows carry equal weights, so dropping the positive row scaling leaves
  /// the null space (hence delta) unchanged while keeping the matrix
  /// well-conditioned at large N.
  Eigen::MatrixXd coupling_matrix() const;

  /// Matrix of bounded-solution directions in moment space (2N x N),
  /// columns: the outgoing characteristic direction and the stable modes.
  Eigen::MatrixXd r_infinity() const;
};

LayerOperator build_layer(const OrthonormalBasis& basis,
                          const QuadratureRule& rule, NodeDegree degree);

struct CouplingResult {
  Family family = Family::Legendre;
  NodeDegree degree;
  int half_n = 0;
  double delta = 0.0;          // coefficient of the node invariant D + delta C
  Eigen::VectorXd chain;       // delta_1..delta_{N-1} of the invariant chain
  std::vector<std::pair<int, double>> history;  // (N, delta(N)) over a sweep
  std::vector<double> increments;               // log10|delta(N)-delta(N-1)|
};

/// Null vector of the coupling matrix (length N+1, order D, C, gamma).
Eigen::VectorXd coupling_nullvector(const LayerOperator& op);

/// Independent extraction route: row-reduce the coupling matrix to the
/// bidiagonal form with unit diagonal; returns the N superdiagonal entries
/// (delta, delta_1, ..., delta_{N-1}).
Eigen::VectorXd coupling_chain_elimination(const LayerOperator& op);

/// delta and the invariant chain from the null vector, cross-checked
/// against the elimination route to 1e-8 relative.
CouplingResult compute_delta(const LayerOperator& op);

/// delta(N) for N = n_lo..n_hi (evaluated concurrently); result carries the
/// full history, the increments, and the chain at the largest N.
CouplingResult delta_sweep(Family family, NodeDegree degree, int n_lo,
                           int n_hi);

/// Solved node trace for given outgoing characteristics r_minus (one per
/// edge): conserved pair (rho_far, q_far) = (D, C), stable-mode content
/// gamma, and the derived nodal moments.
struct NodeState {
  Family family = Family::Legendre;
  int n_edges = 0;
  int half_n = 0;
  double delta = 0.0;
  Eigen::VectorXd rho_far;       // D per edge (far-field density)
  Eigen::VectorXd q_far;         // C per edge (flux, constant in the layer)
  Eigen::MatrixXd gamma;         // (N-1) x n
  Eigen::VectorXd rho_node;      // rho_i(x=0), layer-corrected
  Eigen::MatrixXd moments_node;  // 2N x n, G_i(0) = T (D,C,gamma_i)^T
  // Max residuals of the four solved equation classes (invariant chain,
  // flux balance, odd-moment balance, characteristics).
  double residual_chain = 0.0;
  double residual_flux = 0.0;
  double residual_odd = 0.0;
  double residual_charac = 0.0;
};

NodeState node_solve(const LayerOperator& op, const Eigen::VectorXd& r_minus);

/// Pointwise values of the nodal distribution f(x=0, v) on v_samples from
/// the spectral expansion (Hermite only). With `fejer_filter`, coefficients
/// of degree k >= 2 are damped by 1 - k/(2N); density and flux are untouched.
Eigen::VectorXd reconstruct_distribution(const LayerOperator& op,
                                         const NodeState& state, int edge,
                                         const Eigen::VectorXd& v_samples,
                                         bool fejer_filter);

struct AuditEntry {
  Family family = Family::Legendre;
  int half_n = 0;
  int n_edges = 0;
  double cond_b1 = 0.0;
  double cond_b2 = 0.0;
  bool invertible = false;
  double quad_form = 0.0;         // y^T A y on a random kernel direction
  double quad_form_closed = 0.0;  // -(n^2-2n) x^T W^{-1} V x
  bool dissipative = false;       // quad_form < 0 (checked for n >= 3)
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool all_invertible = true;
  bool all_dissipative = true;
};

/// Conditioning / solvability audit of the two coupled sub-problems over
/// ranges of N and n, plus the strict-dissipativity sign check for n >= 3.
AuditReport wellposedness_audit(Family family, int half_n_lo, int half_n_hi,
                                int n_edges_lo, int n_edges_hi);

}  // namespace kinnet
