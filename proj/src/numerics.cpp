#include "kinnet/numerics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace kinnet {

namespace {

constexpr double kRankTol = 1e-8;  // relative to the largest singular value

// Largest-magnitude entry positive; first such entry decides on ties.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  int imax = 0;
  double amax = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  if (v[imax] < 0.0) v = -v;
}

}  // namespace

Eigen::MatrixXd SymTridiag::dense() const {
  const int n = dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.diagonal() = diag;
  for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = offdiag[i];
  return m;
}

EigenDecomposition symtridiag_eig(const SymTridiag& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(m.diag, m.offdiag,
                                Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw numerical_error("symtridiag_eig: QL iteration did not converge");
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  for (int k = 0; k < out.eigenvectors.cols(); ++k)
    fix_sign(out.eigenvectors.col(k));
  return out;
}

Eigen::VectorXd symtridiag_eigenvalues(const SymTridiag& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(m.diag, m.offdiag, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw numerical_error(
        "symtridiag_eigenvalues: QL iteration did not converge");
  return solver.eigenvalues();
}

Eigen::VectorXd nullspace_1d(const Eigen::MatrixXd& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  if (cols != rows + 1)
    throw config_error("nullspace_1d: expected an N x (N+1) matrix");

  Eigen::VectorXd u(cols);
  if (rows <= 512) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv[rows - 1] <= kRankTol * sv[0])
      throw numerical_error(
          "nullspace_1d: null space dimension > 1 (rank deficiency)");
    u = svd.matrixV().col(cols - 1);
  } else {
    // Orthogonal complement of the row space via column-pivoted QR of M^T.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrf(m.transpose());
    const Eigen::MatrixXd& r = qrf.matrixR();
    if (std::abs(r(rows - 1, rows - 1)) <= kRankTol * std::abs(r(0, 0)))
      throw numerical_error(
          "nullspace_1d: null space dimension > 1 (rank deficiency)");
    u = Eigen::MatrixXd(qrf.householderQ()).col(cols - 1);
  }
  u.normalize();
  fix_sign(u);
  return u;
}

Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd d = lu.matrixLU().diagonal().cwiseAbs();
  if (d.minCoeff() <= d.maxCoeff() * std::numeric_limits<double>::epsilon())
    throw numerical_error("solve_dense: matrix is numerically singular");
  return lu.solve(b);
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b) {
  return Eigen::VectorXd(solve_dense(a, Eigen::MatrixXd(b)));
}

QrFactors qr(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> f(m);
  QrFactors out;
  out.q = f.householderQ();
  out.r = f.matrixQR().triangularView<Eigen::Upper>();
  return out;
}

double cond_estimate(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0) || !std::isfinite(smax / smin))
    return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}  // namespace kinnet
