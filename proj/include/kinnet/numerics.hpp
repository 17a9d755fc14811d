#pragma once

#include <Eigen/Dense>

#include "kinnet/errors.hpp"

namespace kinnet {

struct SymTridiag {
  Eigen::VectorXd diag;     // length dim
  Eigen::VectorXd offdiag;  // length dim-1

  int dim() const { return static_cast<int>(diag.size()); }
  Eigen::MatrixXd dense() const;
};

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, sign-fixed
};

/// Full spectrum of a symmetric tridiagonal matrix. Column signs are fixed
/// so the largest-magnitude component of each eigenvector is positive.
EigenDecomposition symtridiag_eig(const SymTridiag& m);

/// Eigenvalues only (ascending); cheaper for large dimensions.
Eigen::VectorXd symtridiag_eigenvalues(const SymTridiag& m);

/// Unit-norm null vector of an N x (N+1) matrix of full row rank.
/// Rank decisions use 1e-8 relative to the largest singular value; a null
/// space of dimension > 1 is reported, not guessed. Sign is fixed by
/// making the largest-magnitude entry positive.
Eigen::VectorXd nullspace_1d(const Eigen::MatrixXd& m);

/// Dense solve with partial pivoting; throws numerical_error on singular A.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);
Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct QrFactors {
  Eigen::MatrixXd q;  // m x m orthogonal
  Eigen::MatrixXd r;  // m x n upper triangular
};

QrFactors qr(const Eigen::MatrixXd& m);

/// 2-norm condition number via the singular-value ratio;
/// +inf for numerically singular input.
double cond_estimate(const Eigen::MatrixXd& m);

}  // namespace kinnet
