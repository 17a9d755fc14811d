#include "kinnet/layer.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace kinnet {

namespace {

constexpr double kOrthoTol = 1e-9;       // balanced-transform identity
constexpr double kRouteTol = 1e-8;       // null-space vs elimination delta
constexpr double kCondThreshold = 1e12;  // audit invertibility gate

}  // namespace

NodeDegree NodeDegree::finite(int n_edges) {
  if (n_edges < 2) throw config_error("node degree must be >= 2");
  return NodeDegree{n_edges, false};
}

NodeDegree NodeDegree::unbounded() { return NodeDegree{0, true}; }

std::string NodeDegree::label() const {
  return infinite ? "inf" : std::to_string(n);
}

namespace {

// Row r of the mirror coupling operators combines the trace at velocity
// -v_{N+r} (index N-1-r) with gain_neg and at v_{N+r} (index N+r) with
// gain_pos. Applying them this way avoids forming the N x 2N operator.
Eigen::MatrixXd apply_mirror_pairs(const Eigen::MatrixXd& x, int half_n,
                                   double gain_neg, double gain_pos) {
  Eigen::MatrixXd out(half_n, x.cols());
  for (int r = 0; r < half_n; ++r)
    out.row(r) =
        gain_neg * x.row(half_n - 1 - r) + gain_pos * x.row(half_n + r);
  return out;
}

Eigen::MatrixXd mirror_operator(int half_n, double gain_neg, double gain_pos) {
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(half_n, 2 * half_n);
  for (int r = 0; r < half_n; ++r) {
    op(r, half_n - 1 - r) = gain_neg;
    op(r, half_n + r) = gain_pos;
  }
  return op;
}

}  // namespace

Eigen::MatrixXd LayerOperator::b1() const {
  return mirror_operator(half_n, 1.0, -1.0);
}

Eigen::MatrixXd LayerOperator::b2() const {
  if (degree.infinite) return mirror_operator(half_n, 0.0, 1.0);
  return mirror_operator(half_n, 1.0, double(degree.n - 1));
}

Eigen::MatrixXd LayerOperator::coupling_matrix() const {
  // B2 applied to the columns of the balanced transform first keeps the
  // intermediate at N x 2N.
  const double gain_neg = degree.infinite ? 0.0 : 1.0;
  const double gain_pos = degree.infinite ? 1.0 : double(degree.n - 1);
  Eigen::MatrixXd paired(half_n, 2 * half_n);
  for (int r = 0; r < half_n; ++r)
    paired.row(r) = gain_neg * s_balanced.col(half_n - 1 - r).transpose() +
                    gain_pos * s_balanced.col(half_n + r).transpose();
  return paired * t_matrix;
}

Eigen::MatrixXd LayerOperator::r_infinity() const {
  const int n2 = 2 * half_n;
  const double a1 = basis.alpha[0];
  const double a2 = basis.alpha[1];
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n2, half_n);
  // Incoming characteristic direction of the conserved pair.
  r(0, 0) = 1.0;
  r(1, 0) = 1.0;
  // Stable modes, lifted to the conserved components through the layer ODE.
  r.block(0, 1, 1, half_n - 1) = -(a2 / a1) * r2_plus.row(0);
  r.block(2, 1, n2 - 2, half_n - 1) = r2_plus;
  return r;
}

LayerOperator build_layer(const OrthonormalBasis& basis,
                          const QuadratureRule& rule, NodeDegree degree) {
  const int n2 = rule.n_nodes;
  const int half_n = n2 / 2;
  if (half_n < 2) throw config_error("build_layer: N must be >= 2");
  if (basis.max_degree < n2 - 1)
    throw config_error("build_layer: basis degree too low for the rule");

  LayerOperator op;
  op.basis = basis;
  op.rule = rule;
  op.degree = degree;
  op.half_n = half_n;

  op.a22.diag = Eigen::VectorXd::Zero(n2 - 2);
  op.a22.offdiag = basis.alpha.segment(2, n2 - 3);  // alpha_3..alpha_{2N-1}

  const EigenDecomposition eig = symtridiag_eig(op.a22);
  int positive = 0;
  for (int i = 0; i < n2 - 2; ++i)
    if (eig.eigenvalues[i] > 0.0) ++positive;
  if (positive != half_n - 1)
    throw numerical_error("build_layer: expected N-1 positive layer modes");
  op.lambda_plus = eig.eigenvalues.tail(half_n - 1);
  op.r2_plus = eig.eigenvectors.rightCols(half_n - 1);

  op.s_balanced.resize(n2, n2);
  for (int i = 0; i < n2; ++i)
    op.s_balanced.col(i) = std::sqrt(rule.weights_mod[i]) *
                           eval_weighted_all(basis, n2 - 1, rule.nodes[i]);

  const double ortho_err =
      (op.s_balanced * op.s_balanced.transpose() -
       Eigen::MatrixXd::Identity(n2, n2))
          .cwiseAbs()
          .maxCoeff();
  if (ortho_err > kOrthoTol)
    throw numerical_error(
        "build_layer: discrete orthonormality violated (bad quadrature rule)");

  // Boundary representation G(0) = T (D, C, gamma)^T.
  const double a1 = basis.alpha[0];
  const double a2 = basis.alpha[1];
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n2, half_n + 1);
  t(0, 0) = inv_sqrt2;
  t(1, 1) = basis.family == Family::Legendre ? inv_sqrt2 / a1 : inv_sqrt2;
  const double gain =
      basis.family == Family::Legendre ? -(a2 / a1) : -std::sqrt(2.0);
  t.block(0, 2, 1, half_n - 1) = gain * op.r2_plus.row(0);
  t.block(2, 2, n2 - 2, half_n - 1) = op.r2_plus;
  op.t_matrix = std::move(t);
  return op;
}

Eigen::VectorXd coupling_nullvector(const LayerOperator& op) {
  return nullspace_1d(op.coupling_matrix());
}

Eigen::VectorXd coupling_chain_elimination(const LayerOperator& op) {
  Eigen::MatrixXd m = op.coupling_matrix();
  const int n = op.half_n;
  const int cols = n + 1;
  const double scale = m.cwiseAbs().maxCoeff();

  // Gauss-Jordan with partial pivoting to reduced row echelon form. One
  // column stays pivot-free; usually the last, but for a two-edge node the
  // flux column is identically zero and takes that role (delta = 0 there).
  std::vector<int> pivot_row_of_col(cols, -1);
  int row = 0;
  for (int col = 0; col < cols && row < n; ++col) {
    int piv = row;
    for (int r = row + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (std::abs(m(piv, col)) <= 1e-13 * scale) continue;
    if (piv != row) m.row(piv).swap(m.row(row));
    m.row(row) /= m(row, col);
    for (int r = 0; r < n; ++r)
      if (r != row) m.row(r) -= m(r, col) * m.row(row);
    pivot_row_of_col[col] = row;
    ++row;
  }
  if (row != n)
    throw numerical_error("coupling chain: elimination found rank < N");

  int free_col = -1;
  for (int col = 0; col < cols; ++col)
    if (pivot_row_of_col[col] < 0) free_col = col;

  // Null direction with the free coordinate set to -1; reading consecutive
  // ratios recovers the superdiagonal of the bidiagonal invariant form.
  Eigen::VectorXd x(cols);
  for (int col = 0; col < cols; ++col)
    x[col] = col == free_col ? -1.0 : m(pivot_row_of_col[col], free_col);
  Eigen::VectorXd chain(n);
  for (int k = 0; k < n; ++k) chain[k] = -x[k] / x[k + 1];
  return chain;
}

CouplingResult compute_delta(const LayerOperator& op) {
  const int n = op.half_n;
  const Eigen::VectorXd u = coupling_nullvector(op);
  Eigen::VectorXd chain(n);
  for (int k = 0; k + 1 <= n; ++k) chain[k] = -u[k] / u[k + 1];

  const Eigen::VectorXd chain_elim = coupling_chain_elimination(op);
  const double d0 = chain[0], d1 = chain_elim[0];
  // relative with an absolute floor: delta vanishes for a two-edge node
  if (std::abs(d0 - d1) >
      kRouteTol * std::max({std::abs(d0), std::abs(d1), 1.0})) {
    std::ostringstream msg;
    msg << "compute_delta: extraction routes disagree (null-space " << d0
        << ", elimination " << d1 << ")";
    throw numerical_error(msg.str());
  }

  CouplingResult out;
  out.family = op.basis.family;
  out.degree = op.degree;
  out.half_n = n;
  out.delta = chain[0];
  out.chain = chain.tail(n - 1);
  out.history = {{n, out.delta}};
  if (!std::isfinite(out.delta))
    throw numerical_error("compute_delta: delta is not finite");
  return out;
}

CouplingResult delta_sweep(Family family, NodeDegree degree, int n_lo,
                           int n_hi) {
  if (n_lo < 2) throw config_error("delta_sweep: N range must start at >= 2");
  if (n_hi < n_lo) throw config_error("delta_sweep: empty N range");

  const int count = n_hi - n_lo + 1;
  std::vector<double> deltas(count);
  std::vector<Eigen::VectorXd> chains(count);
  std::string failure;

#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < count; ++idx) {
    try {
      const int half_n = n_lo + idx;
      const OrthonormalBasis basis = make_basis(family, 2 * half_n);
      const QuadratureRule rule = gauss_rule(family, 2 * half_n);
      const CouplingResult r =
          compute_delta(build_layer(basis, rule, degree));
      deltas[idx] = r.delta;
      if (idx == count - 1) chains[idx] = r.chain;
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw numerical_error("delta_sweep: " + failure);

  CouplingResult out;
  out.family = family;
  out.degree = degree;
  out.half_n = n_hi;
  out.delta = deltas[count - 1];
  out.chain = chains[count - 1];
  out.history.reserve(count);
  for (int idx = 0; idx < count; ++idx)
    out.history.emplace_back(n_lo + idx, deltas[idx]);
  out.increments.reserve(count - 1);
  for (int idx = 1; idx < count; ++idx) {
    const double diff = std::abs(deltas[idx] - deltas[idx - 1]);
    out.increments.push_back(std::log10(std::max(diff, 1e-300)));
  }
  return out;
}

NodeState node_solve(const LayerOperator& op, const Eigen::VectorXd& r_minus) {
  if (op.degree.infinite)
    throw config_error("node_solve: requires a finite number of edges");
  const int n_edges = op.degree.n;
  if (r_minus.size() != n_edges)
    throw config_error("node_solve: r_minus size must match the edge count");

  const int big_n = op.half_n;
  const CouplingResult coupling = compute_delta(op);

  const double a = op.basis.wave_speed;
  const int block = big_n + 1;  // per-edge unknowns (D, C, gamma)
  const int dim = n_edges * block;
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  int row = 0;

  // Node invariants equal across consecutive edge pairs. The rows of the
  // coupling matrix span the same space as the bidiagonal invariant chain
  // (D + delta C, C + delta_1 gamma_1, ...) but stay well-scaled at large N,
  // where the trailing chain ratios degenerate into quotients of underflowed
  // null-vector components.
  const Eigen::MatrixXd m = op.coupling_matrix();
  for (int e = 0; e + 1 < n_edges; ++e, row += big_n) {
    sys.block(row, e * block, big_n, block) = m;
    sys.block(row, (e + 1) * block, big_n, block) = -m;
  }

  // Flux balance.
  for (int e = 0; e < n_edges; ++e) sys(row, e * block + 1) = 1.0;
  ++row;

  // Odd-moment balance: sum_e (R2+ gamma_e) on the odd rows vanishes.
  for (int k = 1; k < big_n; ++k, ++row)
    for (int e = 0; e < n_edges; ++e)
      sys.row(row).segment(e * block + 2, big_n - 1) +=
          op.r2_plus.row(2 * k - 1);

  // Outgoing characteristics C - a D = r_minus.
  for (int e = 0; e < n_edges; ++e, ++row) {
    sys(row, e * block) = -a;
    sys(row, e * block + 1) = 1.0;
    rhs[row] = r_minus[e];
  }

  Eigen::VectorXd x;
  try {
    x = solve_dense(sys, rhs);
  } catch (const numerical_error&) {
    std::ostringstream msg;
    msg << "node_solve: singular node system (cond ~ " << cond_estimate(sys)
        << ")";
    throw numerical_error(msg.str());
  }

  NodeState st;
  st.family = op.basis.family;
  st.n_edges = n_edges;
  st.half_n = big_n;
  st.delta = coupling.delta;
  st.rho_far.resize(n_edges);
  st.q_far.resize(n_edges);
  st.gamma.resize(big_n - 1, n_edges);
  st.rho_node.resize(n_edges);
  st.moments_node.resize(2 * big_n, n_edges);

  const double layer_gain = op.basis.family == Family::Legendre
                                ? op.basis.alpha[1] * std::sqrt(2.0) /
                                      op.basis.alpha[0]
                                : 2.0;
  for (int e = 0; e < n_edges; ++e) {
    st.rho_far[e] = x[e * block];
    st.q_far[e] = x[e * block + 1];
    st.gamma.col(e) = x.segment(e * block + 2, big_n - 1);
    st.rho_node[e] =
        st.rho_far[e] - layer_gain * op.r2_plus.row(0).dot(st.gamma.col(e));
    st.moments_node.col(e) = op.t_matrix * x.segment(e * block, block);
  }

  // Residuals of the four equation classes, for downstream sanity checks.
  const Eigen::VectorXd res = (sys * x - rhs).cwiseAbs();
  const int n_chain = (n_edges - 1) * big_n;
  st.residual_chain = res.head(n_chain).maxCoeff();
  st.residual_flux = res[n_chain];
  st.residual_odd = res.segment(n_chain + 1, big_n - 1).maxCoeff();
  st.residual_charac = res.tail(n_edges).maxCoeff();
  return st;
}

Eigen::VectorXd reconstruct_distribution(const LayerOperator& op,
                                         const NodeState& state, int edge,
                                         const Eigen::VectorXd& v_samples,
                                         bool fejer_filter) {
  if (op.basis.family != Family::Hermite)
    throw config_error(
        "reconstruct_distribution: spectral reconstruction is defined for "
        "the unbounded (Hermite) family");
  if (edge < 0 || edge >= state.n_edges)
    throw config_error("reconstruct_distribution: edge index out of range");

  const int n2 = 2 * op.half_n;
  Eigen::VectorXd coeff = state.moments_node.col(edge);
  if (fejer_filter)
    for (int k = 2; k < n2; ++k) coeff[k] *= 1.0 - double(k) / double(n2);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd f(v_samples.size());
  for (int i = 0; i < v_samples.size(); ++i) {
    const double vt = v_samples[i] * inv_sqrt2;
    const Eigen::VectorXd h = eval_weighted_all(op.basis, n2 - 1, vt);
    f[i] = h[0] * h.dot(coeff);
  }
  return f;
}

namespace {

// y^T A y with A the full 2N x 2N moment transport matrix, evaluated on the
// kernel direction y = S ((n-1) x-mirrored; -x) of the summed coupling
// operator. Uses the bare Vandermonde matrix; fine for the audit sizes.
double dissipativity_form(const LayerOperator& op, int n_edges,
                          const Eigen::VectorXd& x, double* closed_form) {
  const int half_n = op.half_n;
  const int n2 = 2 * half_n;

  Eigen::VectorXd k(n2);
  for (int i = 0; i < half_n; ++i) k[i] = (n_edges - 1) * x[half_n - 1 - i];
  k.tail(half_n) = -x;

  Eigen::MatrixXd s(n2, n2);
  for (int i = 0; i < n2; ++i)
    s.col(i) = eval_poly_all(op.basis, n2 - 1, op.rule.nodes[i]);

  SymTridiag transport;
  transport.diag = Eigen::VectorXd::Zero(n2);
  transport.offdiag = op.basis.alpha.head(n2 - 1);

  const Eigen::VectorXd y = s * k;
  const double form = y.dot(transport.dense() * y);

  double closed = 0.0;
  for (int i = 0; i < half_n; ++i) {
    const int j = half_n + i;
    closed -= double(n_edges) * double(n_edges - 2) * op.rule.nodes[j] /
              op.rule.weights[j] * x[i] * x[i];
  }
  *closed_form = closed;
  return form;
}

}  // namespace

AuditReport wellposedness_audit(Family family, int half_n_lo, int half_n_hi,
                                int n_edges_lo, int n_edges_hi) {
  if (half_n_lo < 2 || half_n_hi < half_n_lo)
    throw config_error("wellposedness_audit: bad N range");
  if (n_edges_lo < 2 || n_edges_hi < n_edges_lo)
    throw config_error("wellposedness_audit: bad edge-count range");

  AuditReport report;
  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (int half_n = half_n_lo; half_n <= half_n_hi; ++half_n) {
    const OrthonormalBasis basis = make_basis(family, 2 * half_n);
    const QuadratureRule rule = gauss_rule(family, 2 * half_n);
    const LayerOperator op =
        build_layer(basis, rule, NodeDegree::finite(std::max(n_edges_lo, 2)));
    const Eigen::MatrixXd trace_map = op.s_balanced.transpose() *
                                      op.r_infinity();
    const double cond_b1 = cond_estimate(
        apply_mirror_pairs(trace_map, half_n, 1.0, -1.0));

    for (int n_edges = n_edges_lo; n_edges <= n_edges_hi; ++n_edges) {
      AuditEntry entry;
      entry.family = family;
      entry.half_n = half_n;
      entry.n_edges = n_edges;
      entry.cond_b1 = cond_b1;
      entry.cond_b2 = cond_estimate(apply_mirror_pairs(
          trace_map, half_n, 1.0, double(n_edges - 1)));
      entry.invertible =
          entry.cond_b1 < kCondThreshold && entry.cond_b2 < kCondThreshold;

      if (n_edges >= 3) {
        Eigen::VectorXd x(half_n);
        do {
          for (int i = 0; i < half_n; ++i) x[i] = unif(rng);
        } while (x.norm() < 1e-3);
        entry.quad_form =
            dissipativity_form(op, n_edges, x, &entry.quad_form_closed);
        entry.dissipative = entry.quad_form < 0.0;
      } else {
        entry.dissipative = true;  // n = 2 is covered by the direct solve
      }

      report.all_invertible = report.all_invertible && entry.invertible;
      report.all_dissipative = report.all_dissipative && entry.dissipative;
      report.entries.push_back(entry);
    }
  }
  return report;
}

}  // namespace kinnet
