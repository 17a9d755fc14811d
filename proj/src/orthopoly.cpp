#include "kinnet/orthopoly.hpp"

#include <cmath>

#include "kinnet/numerics.hpp"

namespace kinnet {

const char* family_name(Family family) {
  return family == Family::Legendre ? "legendre" : "hermite";
}

double alpha_coeff(Family family, int k) {
  if (k < 1) throw config_error("alpha_coeff: k must be >= 1");
  if (family == Family::Legendre)
    return k / std::sqrt(double(2 * k - 1) * double(2 * k + 1));
  return std::sqrt(0.5 * k);
}

Eigen::VectorXd recursion_coeffs(Family family, int max_degree) {
  if (max_degree < 1) throw config_error("recursion_coeffs: K must be >= 1");
  Eigen::VectorXd alpha(max_degree);
  for (int k = 1; k <= max_degree; ++k) alpha[k - 1] = alpha_coeff(family, k);
  return alpha;
}

OrthonormalBasis make_basis(Family family, int max_degree) {
  OrthonormalBasis basis;
  basis.family = family;
  basis.max_degree = max_degree;
  basis.alpha = recursion_coeffs(family, max_degree);
  basis.wave_speed = family == Family::Legendre ? alpha_coeff(family, 1) : 1.0;
  basis.p0 = family == Family::Legendre ? 1.0 / std::sqrt(2.0)
                                        : std::pow(M_PI, -0.25);
  return basis;
}

namespace {

// Forward recursion P_{k+1} = (v P_k - alpha_k P_{k-1}) / alpha_{k+1},
// seeded with p_0; works for the bare P_k and for the weighted psi_k alike
// since the weight factors out.
void recurse_into(Family family, double p_0, int max_degree, double v,
                  Eigen::VectorXd& out) {
  out.resize(max_degree + 1);
  out[0] = p_0;
  if (max_degree == 0) return;
  out[1] = v * p_0 / alpha_coeff(family, 1);
  for (int k = 1; k < max_degree; ++k)
    out[k + 1] =
        (v * out[k] - alpha_coeff(family, k) * out[k - 1]) /
        alpha_coeff(family, k + 1);
}

}  // namespace

double eval_poly(const OrthonormalBasis& basis, int k, double v) {
  if (k < 0 || k > basis.max_degree + 1)
    throw config_error("eval_poly: degree out of range");
  Eigen::VectorXd p;
  recurse_into(basis.family, basis.p0, k, v, p);
  return p[k];
}

Eigen::VectorXd eval_poly_all(const OrthonormalBasis& basis, int max_degree,
                              double v) {
  Eigen::VectorXd p;
  recurse_into(basis.family, basis.p0, max_degree, v, p);
  return p;
}

namespace {

// Same three-term recursion, but with the Gaussian factor carried as a
// separate log-scale: at nodes with v^2/2 beyond ~708 the plain seed
// underflows to zero and would silence the entire sequence, although the
// high-degree weighted values are O(1).
Eigen::VectorXd recurse_log_scaled(const OrthonormalBasis& basis,
                                   int max_degree, double v) {
  constexpr double kCap = 1e100;
  const auto value = [](double u, double log_scale) {
    return u == 0.0 ? 0.0
                    : std::copysign(
                          std::exp(log_scale + std::log(std::abs(u))), u);
  };
  Eigen::VectorXd out(max_degree + 1);
  double log_scale = -0.5 * v * v;
  double u_prev = basis.p0;
  out[0] = value(u_prev, log_scale);
  if (max_degree == 0) return out;
  double u = v * u_prev / alpha_coeff(basis.family, 1);
  out[1] = value(u, log_scale);
  for (int k = 1; k < max_degree; ++k) {
    double u_next = (v * u - alpha_coeff(basis.family, k) * u_prev) /
                    alpha_coeff(basis.family, k + 1);
    if (std::abs(u_next) > kCap) {
      u_next /= kCap;
      u /= kCap;
      log_scale += std::log(kCap);
    }
    out[k + 1] = value(u_next, log_scale);
    u_prev = u;
    u = u_next;
  }
  return out;
}

}  // namespace

Eigen::VectorXd eval_weighted_all(const OrthonormalBasis& basis,
                                  int max_degree, double v) {
  if (basis.family == Family::Hermite && 0.5 * v * v >= 700.0)
    return recurse_log_scaled(basis, max_degree, v);
  const double seed = basis.family == Family::Hermite
                          ? basis.p0 * std::exp(-0.5 * v * v)
                          : basis.p0;
  Eigen::VectorXd p;
  recurse_into(basis.family, seed, max_degree, v, p);
  return p;
}

double weight_integral(Family family) {
  return family == Family::Legendre ? 2.0 : std::sqrt(M_PI);
}

QuadratureRule gauss_rule(Family family, int n_nodes) {
  if (n_nodes < 2 || n_nodes % 2 != 0)
    throw config_error("gauss_rule: node count must be even and >= 2");

  SymTridiag jacobi;
  jacobi.diag = Eigen::VectorXd::Zero(n_nodes);
  jacobi.offdiag = recursion_coeffs(family, n_nodes - 1);

  QuadratureRule rule;
  rule.n_nodes = n_nodes;
  rule.nodes = symtridiag_eigenvalues(jacobi);
  rule.weights.resize(n_nodes);
  rule.weights_mod.resize(n_nodes);

  // Enforce exact node symmetry before the weights are evaluated.
  const int half = n_nodes / 2;
  for (int i = 0; i < half; ++i) {
    const int j = rule.mirror(i);
    const double v = 0.5 * (rule.nodes[i] - rule.nodes[j]);
    rule.nodes[i] = v;
    rule.nodes[j] = -v;
  }
  if (!(rule.nodes[half - 1] < 0.0 && rule.nodes[half] > 0.0))
    throw numerical_error("gauss_rule: node symmetry violated around 0");

  const OrthonormalBasis basis = make_basis(family, n_nodes);

  // Weights as Christoffel numbers 1/sum_k psi_k(v_i)^2, evaluated in the
  // weighted representation. Unlike the first-eigenvector formula this
  // keeps full relative accuracy in the Hermite tails, where the
  // eigenvector components drop below the QL solver's absolute noise.
  for (int i = 0; i < n_nodes; ++i) {
    const Eigen::VectorXd psi =
        eval_weighted_all(basis, n_nodes - 1, rule.nodes[i]);
    const double wm = 1.0 / psi.squaredNorm();
    rule.weights_mod[i] = wm;
    rule.weights[i] = family == Family::Hermite
                          ? wm * std::exp(-rule.nodes[i] * rule.nodes[i])
                          : wm;
  }
  for (int i = 0; i < half; ++i) {
    const int j = rule.mirror(i);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
    const double wm = 0.5 * (rule.weights_mod[i] + rule.weights_mod[j]);
    rule.weights_mod[i] = rule.weights_mod[j] = wm;
  }
  return rule;
}

}  // namespace kinnet
