#include "kinnet/netsim.hpp"

#include <cmath>

#include "kinnet/coupling.hpp"

namespace kinnet {

Eigen::MatrixXd NetworkConfig::symmetric_beta(int n_edges) {
  if (n_edges == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd beta =
      Eigen::MatrixXd::Constant(n_edges, n_edges, 1.0 / (n_edges - 1));
  beta.diagonal().setZero();
  return beta;
}

void NetworkConfig::apply_defaults() {
  if (edge_length.empty()) edge_length.assign(n_edges, 0.5);
  if (beta.size() == 0) beta = symmetric_beta(n_edges);
  if (rho_init.empty()) rho_init.assign(n_edges, 1.0);
  if (q_init.empty()) q_init.assign(n_edges, 0.0);
  if (rho_bc.empty()) rho_bc = rho_init;
  if (q_bc.empty()) q_bc = q_init;
}

void NetworkConfig::validate() const {
  if (n_edges < 1) throw config_error("network: need at least one edge");
  if (half_n < 1) throw config_error("network: N must be >= 1");
  if (!(dx > 0.0)) throw config_error("network: dx must be positive");
  if (!(t_final > 0.0)) throw config_error("network: t_final must be positive");
  if (!(cfl > 0.0 && cfl < 1.0))
    throw config_error("network: cfl must lie in (0,1)");
  if (!(epsilon > 0.0)) throw config_error("network: epsilon must be positive");
  const auto need = [&](size_t got, const char* what) {
    if (static_cast<int>(got) != n_edges)
      throw config_error(std::string("network: ") + what +
                         " must have one entry per edge");
  };
  need(edge_length.size(), "edge lengths");
  need(rho_init.size(), "initial densities");
  need(q_init.size(), "initial fluxes");
  need(rho_bc.size(), "boundary densities");
  need(q_bc.size(), "boundary fluxes");
  for (double b : edge_length)
    if (!(b > 0.0)) throw config_error("network: edge lengths must be positive");
  if (beta.rows() != n_edges || beta.cols() != n_edges)
    throw config_error("network: beta must be n x n");
  for (int j = 0; j < n_edges; ++j) {
    if (std::abs(beta.col(j).sum() - 1.0) > 1e-12)
      throw config_error("network: beta columns must sum to 1");
    for (int i = 0; i < n_edges; ++i)
      if (beta(i, j) < 0.0)
        throw config_error("network: beta entries must be nonnegative");
  }
}

DiscreteVelocityModel make_dvm(Family family, int half_n) {
  const int n_vel = 2 * half_n;
  const QuadratureRule rule = gauss_rule(family, n_vel);
  const OrthonormalBasis basis = make_basis(family, n_vel);

  DiscreteVelocityModel dvm;
  dvm.family = family;
  dvm.n_vel = n_vel;
  dvm.v = rule.nodes;

  if (family == Family::Legendre) {
    dvm.speed = rule.nodes;
    dvm.mom_rho = Eigen::VectorXd::Ones(n_vel);
    dvm.mom_q = rule.nodes;
    // Probability-normalized weights; the local equilibrium is
    // M_k = w~_k (rho + 3 v_k q) with a^2 = 1/3.
    const Eigen::VectorXd wn = rule.weights / rule.weights.sum();
    dvm.maxwell_rho = wn;
    dvm.maxwell_q = 3.0 * wn.cwiseProduct(rule.nodes);
  } else {
    const double sqrt2 = std::sqrt(2.0);
    dvm.speed = sqrt2 * rule.nodes;
    dvm.mom_rho.resize(n_vel);
    dvm.mom_q.resize(n_vel);
    dvm.maxwell_rho.resize(n_vel);
    dvm.maxwell_q.resize(n_vel);
    for (int k = 0; k < n_vel; ++k) {
      // h0, h1: Hermite functions at the node; moments carry sqrt(2) so that
      // rho and q are the physical density and flux.
      const Eigen::VectorXd h = eval_weighted_all(basis, 1, rule.nodes[k]);
      dvm.mom_rho[k] = sqrt2 * h[0];
      dvm.mom_q[k] = sqrt2 * h[1];
      dvm.maxwell_rho[k] = rule.weights_mod[k] * h[0] / sqrt2;
      dvm.maxwell_q[k] = rule.weights_mod[k] * h[1] / sqrt2;
    }
  }
  return dvm;
}

Eigen::VectorXd DiscreteVelocityModel::equilibrium(double rho,
                                                   double q) const {
  return maxwell_rho * rho + maxwell_q * q;
}

double DiscreteVelocityModel::density(
    const Eigen::Ref<const Eigen::VectorXd>& f) const {
  return mom_rho.dot(f);
}

double DiscreteVelocityModel::flux(
    const Eigen::Ref<const Eigen::VectorXd>& f) const {
  return mom_q.dot(f);
}

KineticField initial_kinetic_field(const NetworkConfig& cfg,
                                   const DiscreteVelocityModel& dvm) {
  KineticField field;
  field.edges.reserve(cfg.n_edges);
  for (int e = 0; e < cfg.n_edges; ++e) {
    const int cells = static_cast<int>(std::lround(cfg.edge_length[e] / cfg.dx));
    if (cells < 2) throw config_error("network: edge shorter than two cells");
    Eigen::MatrixXd f(dvm.n_vel, cells);
    f.colwise() = dvm.equilibrium(cfg.rho_init[e], cfg.q_init[e]).eval();
    field.edges.push_back(std::move(f));
  }
  return field;
}

Eigen::MatrixXd node_traces(const KineticField& field,
                            const DiscreteVelocityModel& dvm,
                            const NetworkConfig& cfg) {
  const int n_vel = dvm.n_vel;
  Eigen::MatrixXd trace(n_vel, cfg.n_edges);
  for (int e = 0; e < cfg.n_edges; ++e) {
    for (int k = 0; k < n_vel; ++k) {
      if (dvm.speed[k] > 0.0) {
        // Incoming: mirror-coupled outgoing traces of all edges.
        double val = 0.0;
        for (int j = 0; j < cfg.n_edges; ++j)
          val += cfg.beta(e, j) * field.edges[j](dvm.mirror(k), 0);
        trace(k, e) = val;
      } else {
        trace(k, e) = field.edges[e](k, 0);  // first-order extrapolation
      }
    }
  }
  return trace;
}

double kinetic_dt(const DiscreteVelocityModel& dvm, const NetworkConfig& cfg) {
  if (dvm.family == Family::Legendre) return cfg.cfl * cfg.dx;
  return cfg.cfl * cfg.dx / dvm.speed.cwiseAbs().maxCoeff();
}

namespace {

struct StepContext {
  const DiscreteVelocityModel& dvm;
  const NetworkConfig& cfg;
  Eigen::MatrixXd ghost_node;   // node traces, 2N x n
  Eigen::MatrixXd ghost_outer;  // prescribed outer equilibrium, 2N x n
  double dt;
};

// Upwind transport + pointwise-implicit relaxation for one cell. The
// relaxation preserves rho and q of the transported state exactly, so the
// implicit update has the closed form (f* + (dt/eps) M(rho*, q*)) / (1+dt/eps).
// The velocity sums run in fixed index order; callers rely on the update
// being bitwise reproducible.
inline void update_cell(const StepContext& ctx, const Eigen::MatrixXd& f,
                        int edge, int cell, double* scratch,
                        Eigen::MatrixXd& out) {
  const auto& dvm = ctx.dvm;
  const int n_vel = dvm.n_vel;
  const int last = static_cast<int>(f.cols()) - 1;
  const double r = ctx.dt / ctx.cfg.dx;

  for (int k = 0; k < n_vel; ++k) {
    const double s = dvm.speed[k];
    const double nu = s * r;
    double transported;
    if (s > 0.0) {
      const double left =
          cell == 0 ? ctx.ghost_node(k, edge) : f(k, cell - 1);
      transported = f(k, cell) - nu * (f(k, cell) - left);
    } else {
      const double right =
          cell == last ? ctx.ghost_outer(k, edge) : f(k, cell + 1);
      transported = f(k, cell) - nu * (right - f(k, cell));
    }
    scratch[k] = transported;
  }

  double rho = 0.0, q = 0.0;
  for (int k = 0; k < n_vel; ++k) rho += dvm.mom_rho[k] * scratch[k];
  for (int k = 0; k < n_vel; ++k) q += dvm.mom_q[k] * scratch[k];

  const double c = ctx.dt / ctx.cfg.epsilon;  // 0 when epsilon = +inf
  const double inv = 1.0 / (1.0 + c);
  for (int k = 0; k < n_vel; ++k)
    out(k, cell) =
        (scratch[k] + c * (dvm.maxwell_rho[k] * rho + dvm.maxwell_q[k] * q)) *
        inv;
}

StepContext make_context(const KineticField& field,
                         const DiscreteVelocityModel& dvm,
                         const NetworkConfig& cfg, double dt) {
  StepContext ctx{dvm, cfg, node_traces(field, dvm, cfg),
                  Eigen::MatrixXd(dvm.n_vel, cfg.n_edges), dt};
  for (int e = 0; e < cfg.n_edges; ++e)
    ctx.ghost_outer.col(e) = dvm.equilibrium(cfg.rho_bc[e], cfg.q_bc[e]);
  return ctx;
}

// Interface fluxes of the density budget, evaluated on the upwind states the
// scheme actually transports. The node fluxes cancel across edges whenever
// the beta columns sum to one.
void record_audit(const StepContext& ctx, const KineticField& field,
                  StepAudit* audit) {
  if (!audit) return;
  const auto& dvm = ctx.dvm;
  audit->node_flux_total = 0.0;
  audit->outer_flux_total = 0.0;
  for (int e = 0; e < ctx.cfg.n_edges; ++e) {
    const Eigen::MatrixXd& f = field.edges[e];
    const int last = static_cast<int>(f.cols()) - 1;
    double node = 0.0, outer = 0.0;
    for (int k = 0; k < dvm.n_vel; ++k) {
      const double s = dvm.speed[k];
      const double w = dvm.mom_rho[k] * s;
      node += w * (s > 0.0 ? ctx.ghost_node(k, e) : f(k, 0));
      outer += w * (s > 0.0 ? f(k, last) : ctx.ghost_outer(k, e));
    }
    audit->node_flux_total += node;
    audit->outer_flux_total += outer;
  }
}

}  // namespace

void kinetic_step(KineticField& field, const DiscreteVelocityModel& dvm,
                  const NetworkConfig& cfg, double dt, StepAudit* audit) {
  const StepContext ctx = make_context(field, dvm, cfg, dt);
  record_audit(ctx, field, audit);

  std::vector<Eigen::MatrixXd> next(field.edges.size());
  for (int e = 0; e < cfg.n_edges; ++e)
    next[e].resize(dvm.n_vel, field.edges[e].cols());

#pragma omp parallel
  {
    std::vector<double> scratch(dvm.n_vel);
    for (int e = 0; e < cfg.n_edges; ++e) {
      const Eigen::MatrixXd& f = field.edges[e];
      const int cells = static_cast<int>(f.cols());
      // Cells are independent within a step; nowait lets threads flow into
      // the next edge. All writes target distinct columns of next[e].
#pragma omp for schedule(static) nowait
      for (int c = 0; c < cells; ++c)
        update_cell(ctx, f, e, c, scratch.data(), next[e]);
    }
  }
  for (int e = 0; e < cfg.n_edges; ++e) field.edges[e].swap(next[e]);
}

void kinetic_step_reference(KineticField& field,
                            const DiscreteVelocityModel& dvm,
                            const NetworkConfig& cfg, double dt,
                            StepAudit* audit) {
  const StepContext ctx = make_context(field, dvm, cfg, dt);
  record_audit(ctx, field, audit);

  std::vector<double> scratch(dvm.n_vel);
  std::vector<Eigen::MatrixXd> next(field.edges.size());
  for (int e = 0; e < cfg.n_edges; ++e) {
    const Eigen::MatrixXd& f = field.edges[e];
    next[e].resize(dvm.n_vel, f.cols());
    for (int c = 0; c < f.cols(); ++c)
      update_cell(ctx, f, e, c, scratch.data(), next[e]);
  }
  for (int e = 0; e < cfg.n_edges; ++e) field.edges[e].swap(next[e]);
}

namespace {

double field_mass(const KineticField& field, const DiscreteVelocityModel& dvm,
                  const NetworkConfig& cfg) {
  double mass = 0.0;
  for (int e = 0; e < cfg.n_edges; ++e)
    for (int c = 0; c < field.cells(e); ++c)
      mass += dvm.density(field.edges[e].col(c)) * cfg.dx;
  return mass;
}

}  // namespace

KineticRunResult kinetic_simulate(const NetworkConfig& cfg,
                                  bool use_reference_kernel) {
  cfg.validate();
  const DiscreteVelocityModel dvm = make_dvm(cfg.family, cfg.half_n);

  KineticRunResult out;
  out.field = initial_kinetic_field(cfg, dvm);
  out.mass_initial = field_mass(out.field, dvm, cfg);

  const double dt_max = kinetic_dt(dvm, cfg);
  out.steps = static_cast<int>(std::ceil(cfg.t_final / dt_max));
  out.dt = cfg.t_final / out.steps;

  StepAudit audit;
  double outflow = 0.0;
  double node_flux_max = 0.0;
  for (int step = 0; step < out.steps; ++step) {
    if (use_reference_kernel)
      kinetic_step_reference(out.field, dvm, cfg, out.dt, &audit);
    else
      kinetic_step(out.field, dvm, cfg, out.dt, &audit);
    outflow += out.dt * audit.outer_flux_total;
    node_flux_max = std::max(node_flux_max, std::abs(audit.node_flux_total));
  }

  out.mass_final = field_mass(out.field, dvm, cfg);
  out.boundary_outflow = outflow;
  out.mass_balance_residual =
      std::abs(out.mass_final - out.mass_initial + outflow) /
      std::max(std::abs(out.mass_initial), 1e-300);
  out.node_flux_max = node_flux_max;

  out.rho.resize(cfg.n_edges);
  out.q.resize(cfg.n_edges);
  for (int e = 0; e < cfg.n_edges; ++e) {
    const int cells = out.field.cells(e);
    out.rho[e].resize(cells);
    out.q[e].resize(cells);
    for (int c = 0; c < cells; ++c) {
      out.rho[e][c] = dvm.density(out.field.edges[e].col(c));
      out.q[e][c] = dvm.flux(out.field.edges[e].col(c));
    }
  }
  return out;
}

MacroRunResult macro_simulate(const NetworkConfig& cfg, double delta) {
  cfg.validate();
  const OrthonormalBasis basis = make_basis(cfg.family, 1);
  const double a = basis.wave_speed;
  if (std::abs(1.0 + a * delta) < 1e-13)
    throw config_error("macro_simulate: delta = -1/a is not admissible");

  const int n = cfg.n_edges;
  std::vector<int> cells(n);
  // Characteristic variables r+ = q + a rho (speed +a, away from the node)
  // and r- = q - a rho (speed -a, towards the node).
  std::vector<Eigen::VectorXd> rp(n), rm(n);
  for (int e = 0; e < n; ++e) {
    cells[e] = static_cast<int>(std::lround(cfg.edge_length[e] / cfg.dx));
    if (cells[e] < 2) throw config_error("network: edge shorter than two cells");
    rp[e] = Eigen::VectorXd::Constant(cells[e],
                                      cfg.q_init[e] + a * cfg.rho_init[e]);
    rm[e] = Eigen::VectorXd::Constant(cells[e],
                                      cfg.q_init[e] - a * cfg.rho_init[e]);
  }

  MacroRunResult out;
  const double dt_max = cfg.cfl * cfg.dx / a;
  out.steps = static_cast<int>(std::ceil(cfg.t_final / dt_max));
  out.dt = cfg.t_final / out.steps;
  const double nu = a * out.dt / cfg.dx;

  const auto mass = [&]() {
    double m = 0.0;
    for (int e = 0; e < n; ++e)
      m += (rp[e] - rm[e]).sum() / (2.0 * a) * cfg.dx;
    return m;
  };
  out.mass_initial = mass();

  Eigen::VectorXd r_out(n);
  double outflow = 0.0;
  for (int step = 0; step < out.steps; ++step) {
    for (int e = 0; e < n; ++e) r_out[e] = rm[e][0];
    const MacroNodeSolution node = macro_node_solve(n, a, delta, r_out);

    for (int e = 0; e < n; ++e) {
      const int last = cells[e] - 1;
      const double ghost_rp = node.q[e] + a * node.rho[e];
      const double ghost_rm = cfg.q_bc[e] - a * cfg.rho_bc[e];

      // Density flux q at both interfaces, from the upwind trace values.
      outflow += out.dt * 0.5 * (rp[e][last] + ghost_rm);
      outflow -= out.dt * 0.5 * (ghost_rp + rm[e][0]);

      double prev = ghost_rp;
      for (int c = 0; c <= last; ++c) {
        const double cur = rp[e][c];
        rp[e][c] = cur - nu * (cur - prev);
        prev = cur;
      }
      double next = ghost_rm;
      for (int c = last; c >= 0; --c) {
        const double cur = rm[e][c];
        rm[e][c] = cur - nu * (cur - next);
        next = cur;
      }
    }
  }

  out.mass_final = mass();
  out.boundary_outflow = outflow;
  out.mass_balance_residual =
      std::abs(out.mass_final - out.mass_initial + outflow) /
      std::max(std::abs(out.mass_initial), 1e-300);

  out.rho.resize(n);
  out.q.resize(n);
  for (int e = 0; e < n; ++e) {
    out.rho[e] = (rp[e] - rm[e]) / (2.0 * a);
    out.q[e] = 0.5 * (rp[e] + rm[e]);
  }
  return out;
}

CompareReport compare_runs(const KineticRunResult& kinetic,
                           const MacroRunResult& macro,
                           const NetworkConfig& cfg, double layer_cutoff) {
  if (kinetic.rho.size() != macro.rho.size())
    throw config_error("compare_runs: edge counts differ");
  CompareReport report;
  report.layer_cutoff = layer_cutoff;
  for (size_t e = 0; e < kinetic.rho.size(); ++e) {
    if (kinetic.rho[e].size() != macro.rho[e].size())
      throw config_error("compare_runs: grids differ");
    double max_diff = 0.0, l1 = 0.0;
    for (int c = 0; c < kinetic.rho[e].size(); ++c) {
      const double x = (c + 0.5) * cfg.dx;
      if (x <= layer_cutoff) continue;
      const double d = std::abs(kinetic.rho[e][c] - macro.rho[e][c]);
      max_diff = std::max(max_diff, d);
      l1 += d * cfg.dx;
    }
    report.max_diff.push_back(max_diff);
    report.l1_diff.push_back(l1);
  }
  return report;
}

}  // namespace kinnet
