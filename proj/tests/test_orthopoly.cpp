#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kinnet/numerics.hpp"
#include "kinnet/orthopoly.hpp"

using namespace kinnet;

TEST_CASE("recursion coefficients match the closed forms") {
  CHECK(alpha_coeff(Family::Legendre, 1) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(alpha_coeff(Family::Hermite, 2) == doctest::Approx(1.0));
  CHECK(alpha_coeff(Family::Legendre, 3) ==
        doctest::Approx(3.0 / std::sqrt(35.0)).epsilon(1e-15));

  // k/sqrt((2k-1)(2k+1)) = 1/sqrt(4 - 1/k^2): strictly decreasing to 1/2.
  const Eigen::VectorXd leg = recursion_coeffs(Family::Legendre, 40);
  const Eigen::VectorXd her = recursion_coeffs(Family::Hermite, 40);
  for (int k = 1; k < 40; ++k) {
    CHECK(leg[k] < leg[k - 1]);
    CHECK(leg[k] > 0.5);
    CHECK(her[k] > her[k - 1]);  // sqrt(k/2), unbounded
  }
  CHECK_THROWS_AS(recursion_coeffs(Family::Legendre, 0), config_error);
}

TEST_CASE("basis constants") {
  const OrthonormalBasis leg = make_basis(Family::Legendre, 4);
  CHECK(leg.wave_speed == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(leg.p0 == doctest::Approx(1.0 / std::sqrt(2.0)));
  const OrthonormalBasis her = make_basis(Family::Hermite, 4);
  CHECK(her.wave_speed == doctest::Approx(1.0));
  CHECK(her.p0 == doctest::Approx(std::pow(M_PI, -0.25)));
}

TEST_CASE("polynomial evaluation") {
  const OrthonormalBasis leg = make_basis(Family::Legendre, 8);
  CHECK(eval_poly(leg, 2, 0.0) ==
        doctest::Approx(-std::sqrt(5.0 / 8.0)).epsilon(1e-14));
  CHECK(eval_poly(leg, 1, 0.0) == doctest::Approx(0.0));
  // P_2 = sqrt(5/8)(3v^2 - 1)
  for (double v : {-0.9, -0.3, 0.2, 0.7}) {
    CHECK(eval_poly(leg, 2, v) ==
          doctest::Approx(std::sqrt(5.0 / 8.0) * (3.0 * v * v - 1.0))
              .epsilon(1e-14));
  }

  const OrthonormalBasis her = make_basis(Family::Hermite, 8);
  CHECK(eval_poly(her, 1, 1.0) ==
        doctest::Approx(std::sqrt(2.0) * std::pow(M_PI, -0.25))
            .epsilon(1e-14));

  // Weighted evaluations carry the Gaussian factor.
  const double v = 1.7;
  const Eigen::VectorXd p = eval_poly_all(her, 6, v);
  const Eigen::VectorXd psi = eval_weighted_all(her, 6, v);
  for (int k = 0; k <= 6; ++k)
    CHECK(psi[k] ==
          doctest::Approx(p[k] * std::exp(-0.5 * v * v)).epsilon(1e-13));

  CHECK_THROWS_AS(eval_poly(leg, 10, 0.0), config_error);
}

TEST_CASE("two-point rules have the textbook closed form") {
  const QuadratureRule leg = gauss_rule(Family::Legendre, 2);
  CHECK(leg.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(leg.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(leg.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(leg.weights[1] == doctest::Approx(1.0).epsilon(1e-14));

  const QuadratureRule her = gauss_rule(Family::Hermite, 2);
  CHECK(her.nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(her.weights[0] ==
        doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS(gauss_rule(Family::Legendre, 3), config_error);
  CHECK_THROWS_AS(gauss_rule(Family::Legendre, 0), config_error);
}

TEST_CASE("node symmetry is exact and no node sits at zero") {
  for (Family family : {Family::Legendre, Family::Hermite}) {
    for (int half_n : {1, 2, 7, 25, 50}) {
      const QuadratureRule rule = gauss_rule(family, 2 * half_n);
      for (int i = 0; i < half_n; ++i) {
        CHECK(rule.nodes[i] == -rule.nodes[rule.mirror(i)]);
        CHECK(rule.weights[i] == rule.weights[rule.mirror(i)]);
        CHECK(rule.weights_mod[i] == rule.weights_mod[rule.mirror(i)]);
      }
      CHECK(rule.nodes[half_n - 1] < 0.0);
      CHECK(rule.nodes[half_n] > 0.0);
      for (int i = 0; i < rule.n_nodes; ++i) CHECK(rule.weights[i] > 0.0);
      CHECK(rule.weights.sum() ==
            doctest::Approx(weight_integral(family)).epsilon(1e-13));
    }
  }
}

TEST_CASE("discrete orthonormality up to degree 2N-1") {
  for (Family family : {Family::Legendre, Family::Hermite}) {
    for (int half_n : {2, 10, 50}) {
      const int n2 = 2 * half_n;
      const OrthonormalBasis basis = make_basis(family, n2);
      const QuadratureRule rule = gauss_rule(family, n2);
      Eigen::MatrixXd s(n2, n2);
      for (int i = 0; i < n2; ++i)
        s.col(i) = eval_poly_all(basis, n2 - 1, rule.nodes[i]);
      const double err = (s * rule.weights.asDiagonal() * s.transpose() -
                          Eigen::MatrixXd::Identity(n2, n2))
                             .cwiseAbs()
                             .maxCoeff();
      CAPTURE(family_name(family));
      CAPTURE(half_n);
      CHECK(err < 1e-10);
    }
  }
}

TEST_CASE("even moments are integrated exactly up to degree 4N-1") {
  for (int half_n : {1, 2, 5, 10, 25, 50}) {
    const QuadratureRule leg = gauss_rule(Family::Legendre, 2 * half_n);
    const QuadratureRule her = gauss_rule(Family::Hermite, 2 * half_n);
    double leg_exact = 2.0;                 // integral of 1 over [-1,1]
    double her_exact = std::sqrt(M_PI);     // integral of exp(-v^2)
    for (int m = 0; m <= 2 * (2 * half_n) - 1; ++m) {
      if (m > 0) {
        leg_exact = 2.0 / (2 * m + 1);
        her_exact *= (2.0 * m - 1.0) / 2.0;  // appends (2m-1)!!/2^m
      }
      if (2 * m > 2 * (2 * half_n) - 1) break;  // beyond exactness degree
      const double leg_sum =
          leg.weights.dot(leg.nodes.array().pow(2 * m).matrix());
      const double her_sum =
          her.weights.dot(her.nodes.array().pow(2 * m).matrix());
      CAPTURE(half_n);
      CAPTURE(m);
      CHECK(std::abs(leg_sum - leg_exact) < 1e-12 * leg_exact);
      CHECK(std::abs(her_sum - her_exact) < 1e-12 * her_exact);
    }
  }
}

TEST_CASE("tail-compensated weights match w exp(v^2)") {
  const QuadratureRule leg = gauss_rule(Family::Legendre, 20);
  CHECK(leg.weights_mod == leg.weights);

  const QuadratureRule her = gauss_rule(Family::Hermite, 50);
  for (int i = 0; i < her.n_nodes; ++i) {
    const double expected =
        her.weights[i] * std::exp(her.nodes[i] * her.nodes[i]);
    CHECK(her.weights_mod[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

// The first-eigenvector weight formula is accurate as long as the weights
// stay well above the eigensolver's absolute noise; use it as an
// independent oracle there.
TEST_CASE("weights agree with the first-eigenvector route") {
  struct Probe {
    Family family;
    int n_nodes;
  };
  for (const Probe probe : {Probe{Family::Legendre, 60},
                            Probe{Family::Legendre, 8},
                            Probe{Family::Hermite, 16}}) {
    SymTridiag jacobi;
    jacobi.diag = Eigen::VectorXd::Zero(probe.n_nodes);
    jacobi.offdiag = recursion_coeffs(probe.family, probe.n_nodes - 1);
    const EigenDecomposition eig = symtridiag_eig(jacobi);
    const QuadratureRule rule = gauss_rule(probe.family, probe.n_nodes);
    for (int i = 0; i < probe.n_nodes; ++i) {
      const double q1 = eig.eigenvectors(0, i);
      const double w = weight_integral(probe.family) * q1 * q1;
      CHECK(rule.weights[i] == doctest::Approx(w).epsilon(1e-9));
    }
  }
}
