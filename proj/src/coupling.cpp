#include "kinnet/coupling.hpp"

#include <cmath>

#include "kinnet/numerics.hpp"

namespace kinnet {

double approx_delta(Family family, NodeDegree degree, ApproxMethod method) {
  // r = (n-2)/n, with limit 1 for the unbounded node.
  const double r = degree.infinite
                       ? 1.0
                       : double(degree.n - 2) / double(degree.n);
  if (family == Family::Legendre) {
    if (method == ApproxMethod::HalfFlux) return 2.0 * r;
    const double s3 = std::sqrt(3.0);
    return r * (9.0 / s3 + 4.0 * r) / (4.0 / s3 + 2.0 * r);
  }
  if (method == ApproxMethod::HalfFlux)
    return std::sqrt(M_PI) * r / std::sqrt(2.0);
  const double s2pi = std::sqrt(2.0 * M_PI);
  return r * (4.0 + r * s2pi) / (s2pi + 2.0 * r);
}

MacroCoupling make_macro_coupling(int n_edges, double wave_speed,
                                  double delta) {
  if (n_edges < 2) throw config_error("macro coupling: n must be >= 2");
  if (!(wave_speed > 0.0))
    throw config_error("macro coupling: wave speed must be positive");

  const int n = n_edges;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  // Flux balance row, then the rho + delta q difference rows.
  for (int j = 0; j < n; ++j) b(0, n + j) = 1.0;
  for (int i = 1; i < n; ++i) {
    b(i, i - 1) = 1.0;
    b(i, i) = -1.0;
    b(i, n + i - 1) = delta;
    b(i, n + i) = -delta;
  }
  // Outgoing characteristics q - a rho = r_minus.
  for (int i = 0; i < n; ++i) {
    b(n + i, i) = -wave_speed;
    b(n + i, n + i) = 1.0;
  }
  return MacroCoupling{n, wave_speed, delta, std::move(b)};
}

MacroNodeSolution macro_node_solve(int n_edges, double wave_speed,
                                   double delta,
                                   const Eigen::VectorXd& r_minus) {
  if (r_minus.size() != n_edges)
    throw config_error("macro_node_solve: r_minus size must equal n");
  const MacroCoupling mc = make_macro_coupling(n_edges, wave_speed, delta);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n_edges);
  rhs.tail(n_edges) = r_minus;
  Eigen::VectorXd u;
  try {
    u = solve_dense(mc.matrix_b, rhs);
  } catch (const numerical_error&) {
    throw numerical_error(
        "macro_node_solve: singular coupling system (delta = -1/a)");
  }

  MacroNodeSolution sol;
  sol.rho = u.head(n_edges);
  sol.q = u.tail(n_edges);

  // Post hoc verification of flux balance and invariant equality.
  const double scale =
      std::max(1.0, sol.rho.cwiseAbs().maxCoeff() +
                        sol.q.cwiseAbs().maxCoeff());
  if (std::abs(sol.q.sum()) > 1e-10 * scale)
    throw numerical_error("macro_node_solve: flux balance violated");
  const Eigen::VectorXd invariant = sol.rho + delta * sol.q;
  if ((invariant.array() - invariant[0]).abs().maxCoeff() > 1e-10 * scale)
    throw numerical_error("macro_node_solve: node invariant not equal");
  return sol;
}

}  // namespace kinnet
