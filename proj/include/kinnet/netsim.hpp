#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kinnet/orthopoly.hpp"

namespace kinnet {

/// Star network with one node and n outgoing edges, each parametrized by
/// [0, length] with the node at x = 0.
struct NetworkConfig {
  Family family = Family::Hermite;
  int n_edges = 3;
  std::vector<double> edge_length;  // b_i; uniform default 0.5
  double epsilon = 5e-3;            // relaxation parameter (may be +inf)
  int half_n = 16;                  // N; 2N discrete velocities
  double dx = 1e-3;
  double t_final = 0.1;
  double cfl = 0.9;
  Eigen::MatrixXd beta;             // n x n, column sums 1
  std::vector<double> rho_init, q_init;  // per-edge equilibrium data
  std::vector<double> rho_bc, q_bc;      // outer-boundary equilibrium data

  static Eigen::MatrixXd symmetric_beta(int n_edges);
  void apply_defaults();  // fill lengths/bc from init where unset
  void validate() const;  // throws config_error
};

/// Velocity grid plus the moment and Maxwellian weights of the discrete
/// relaxation model. Uniform over both families:
///   rho = mom_rho . f, q = mom_q . f, M_k = maxwell_rho[k] rho + maxwell_q[k] q.
struct DiscreteVelocityModel {
  Family family = Family::Legendre;
  int n_vel = 0;              // 2N
  Eigen::VectorXd v;          // quadrature nodes
  Eigen::VectorXd speed;      // transport speed: v (Legendre), sqrt(2) v (Hermite)
  Eigen::VectorXd mom_rho, mom_q;
  Eigen::VectorXd maxwell_rho, maxwell_q;

  int mirror(int k) const { return n_vel - 1 - k; }
  Eigen::VectorXd equilibrium(double rho, double q) const;
  double density(const Eigen::Ref<const Eigen::VectorXd>& f) const;
  double flux(const Eigen::Ref<const Eigen::VectorXd>& f) const;
};

DiscreteVelocityModel make_dvm(Family family, int half_n);

/// Per-edge distribution values; edges[e] is 2N x cells, one column per cell.
struct KineticField {
  std::vector<Eigen::MatrixXd> edges;

  int cells(int e) const { return static_cast<int>(edges[e].cols()); }
};

KineticField initial_kinetic_field(const NetworkConfig& cfg,
                                   const DiscreteVelocityModel& dvm);

/// Node traces (2N x n): for each edge, incoming velocities carry the
/// mirror-coupled values sum_j beta(i,j) f^j(0, -v), outgoing velocities the
/// first-order extrapolated interior values.
Eigen::MatrixXd node_traces(const KineticField& field,
                            const DiscreteVelocityModel& dvm,
                            const NetworkConfig& cfg);

/// Stable step size: cfl * dx (Legendre, |v| <= 1) or cfl * dx / max|speed|.
double kinetic_dt(const DiscreteVelocityModel& dvm, const NetworkConfig& cfg);

struct StepAudit {
  double node_flux_total = 0.0;   // sum over edges of the node-interface flux
  double outer_flux_total = 0.0;  // sum over edges of the outer-interface flux
};

/// One step of upwind transport with pointwise-implicit relaxation.
/// The parallel kernel and the serial reference produce identical results;
/// per-cell velocity sums run in a fixed order in both.
void kinetic_step(KineticField& field, const DiscreteVelocityModel& dvm,
                  const NetworkConfig& cfg, double dt,
                  StepAudit* audit = nullptr);
void kinetic_step_reference(KineticField& field,
                            const DiscreteVelocityModel& dvm,
                            const NetworkConfig& cfg, double dt,
                            StepAudit* audit = nullptr);

struct KineticRunResult {
  KineticField field;
  std::vector<Eigen::VectorXd> rho;  // final density profiles (cell centers)
  std::vector<Eigen::VectorXd> q;
  double dt = 0.0;
  int steps = 0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double boundary_outflow = 0.0;      // time-integrated outer-boundary flux
  double mass_balance_residual = 0.0; // |m_T - m_0 + outflow| / m_0
  double node_flux_max = 0.0;         // max_t |sum_e node flux|
};

KineticRunResult kinetic_simulate(const NetworkConfig& cfg,
                                  bool use_reference_kernel = false);

struct MacroRunResult {
  std::vector<Eigen::VectorXd> rho;
  std::vector<Eigen::VectorXd> q;
  double dt = 0.0;
  int steps = 0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double boundary_outflow = 0.0;
  double mass_balance_residual = 0.0;
};

/// Upwind scheme for the limiting wave equation in characteristic variables
/// with the delta-based node coupling.
MacroRunResult macro_simulate(const NetworkConfig& cfg, double delta);

struct CompareReport {
  double layer_cutoff = 0.0;
  std::vector<double> max_diff;  // per edge, max |rho_kin - rho_mac|, x > cutoff
  std::vector<double> l1_diff;   // per edge, dx-weighted L1 difference
};

CompareReport compare_runs(const KineticRunResult& kinetic,
                           const MacroRunResult& macro,
                           const NetworkConfig& cfg, double layer_cutoff);

}  // namespace kinnet
