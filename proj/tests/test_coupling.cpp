#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kinnet/coupling.hpp"

using namespace kinnet;

TEST_CASE("half-flux approximations") {
  CHECK(approx_delta(Family::Legendre, NodeDegree::finite(3),
                     ApproxMethod::HalfFlux) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(approx_delta(Family::Legendre, NodeDegree::unbounded(),
                     ApproxMethod::HalfFlux) == doctest::Approx(2.0));
  CHECK(approx_delta(Family::Hermite, NodeDegree::finite(3),
                     ApproxMethod::HalfFlux) ==
        doctest::Approx(std::sqrt(M_PI) / (3.0 * std::sqrt(2.0)))
            .epsilon(1e-15));
  CHECK(approx_delta(Family::Hermite, NodeDegree::unbounded(),
                     ApproxMethod::HalfFlux) ==
        doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-15));
  CHECK(approx_delta(Family::Legendre, NodeDegree::finite(2),
                     ApproxMethod::HalfFlux) == doctest::Approx(0.0));
}

TEST_CASE("half-moment approximations") {
  CHECK(approx_delta(Family::Legendre, NodeDegree::finite(3),
                     ApproxMethod::HalfMoment) ==
        doctest::Approx(0.731).epsilon(1e-3));
  CHECK(approx_delta(Family::Legendre, NodeDegree::unbounded(),
                     ApproxMethod::HalfMoment) ==
        doctest::Approx(2.134).epsilon(1e-3));
  CHECK(approx_delta(Family::Hermite, NodeDegree::finite(3),
                     ApproxMethod::HalfMoment) ==
        doctest::Approx(0.5079).epsilon(1e-3));
  CHECK(approx_delta(Family::Hermite, NodeDegree::unbounded(),
                     ApproxMethod::HalfMoment) ==
        doctest::Approx(1.4438).epsilon(1e-3));
}

TEST_CASE("approximations increase with the edge count towards the limit") {
  for (Family family : {Family::Legendre, Family::Hermite}) {
    for (ApproxMethod method :
         {ApproxMethod::HalfFlux, ApproxMethod::HalfMoment}) {
      const double limit = approx_delta(family, NodeDegree::unbounded(), method);
      double prev = approx_delta(family, NodeDegree::finite(3), method);
      for (int n : {4, 5, 8, 16, 64, 1024, 1000000}) {
        const double cur = approx_delta(family, NodeDegree::finite(n), method);
        CHECK(cur > prev);
        CHECK(cur < limit);
        prev = cur;
      }
      CHECK(approx_delta(family, NodeDegree::finite(1000000), method) ==
            doctest::Approx(limit).epsilon(1e-4));
    }
  }
}

TEST_CASE("coupling system block structure") {
  const MacroCoupling mc = make_macro_coupling(3, 0.5, 0.7);
  REQUIRE(mc.matrix_b.rows() == 6);
  // flux balance row
  CHECK(mc.matrix_b.row(0).head(3).cwiseAbs().sum() == 0.0);
  CHECK(mc.matrix_b.row(0).tail(3).sum() == 3.0);
  // difference rows
  CHECK(mc.matrix_b(1, 0) == 1.0);
  CHECK(mc.matrix_b(1, 1) == -1.0);
  CHECK(mc.matrix_b(1, 3) == 0.7);
  CHECK(mc.matrix_b(1, 4) == -0.7);
  // characteristic rows
  CHECK(mc.matrix_b(3, 0) == -0.5);
  CHECK(mc.matrix_b(3, 3) == 1.0);
}

TEST_CASE("determinant of the coupling system") {
  for (double a : {1.0 / std::sqrt(3.0), 1.0}) {
    for (int n = 2; n <= 8; ++n) {
      for (double delta : {-2.0, 0.0, 0.5, 5.0}) {
        const MacroCoupling mc = make_macro_coupling(n, a, delta);
        const double expected = (n % 2 == 0 ? -1.0 : 1.0) * n * a *
                                std::pow(1.0 + a * delta, n - 1);
        const double det = mc.matrix_b.determinant();
        CAPTURE(n);
        CAPTURE(a);
        CAPTURE(delta);
        CHECK(std::abs(det - expected) <=
              1e-9 * std::max(std::abs(expected), 1e-30));
      }
      // singular exactly at delta = -1/a
      const MacroCoupling sing = make_macro_coupling(n, a, -1.0 / a);
      CHECK(std::abs(sing.matrix_b.determinant()) < 1e-10);
    }
  }
}

TEST_CASE("node solve is singular at delta = -1/a") {
  const double a = 1.0 / std::sqrt(3.0);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(3);
  r << 1.0, 0.0, -1.0;
  CHECK_THROWS_AS(macro_node_solve(3, a, -std::sqrt(3.0), r),
                  numerical_error);
}

TEST_CASE("symmetric data yields the equilibrium state") {
  const double a = 1.0 / std::sqrt(3.0), rho_bar = 2.5;
  const Eigen::VectorXd r = Eigen::VectorXd::Constant(5, -a * rho_bar);
  const MacroNodeSolution sol = macro_node_solve(5, a, 0.93, r);
  for (int e = 0; e < 5; ++e) {
    CHECK(sol.rho[e] == doctest::Approx(rho_bar).epsilon(1e-13));
    CHECK(std::abs(sol.q[e]) < 1e-13);
  }
}

TEST_CASE("node solve against the closed-form elimination") {
  std::mt19937 rng(41u);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int n : {2, 3, 6}) {
    for (double a : {1.0 / std::sqrt(3.0), 1.0}) {
      const double delta = unif(rng);
      Eigen::VectorXd r(n);
      for (int e = 0; e < n; ++e) r[e] = gauss(rng);
      const MacroNodeSolution sol = macro_node_solve(n, a, delta, r);
      const double r_bar = r.mean();
      for (int e = 0; e < n; ++e) {
        const double q = (r[e] - r_bar) / (1.0 + a * delta);
        CHECK(sol.q[e] == doctest::Approx(q).epsilon(1e-12));
        CHECK(sol.rho[e] == doctest::Approx((q - r[e]) / a).epsilon(1e-12));
        // outgoing characteristics are reproduced
        CHECK(sol.q[e] - a * sol.rho[e] == doctest::Approx(r[e]).epsilon(1e-13));
      }
      CHECK(std::abs(sol.q.sum()) <= 1e-12);
      const Eigen::VectorXd inv = sol.rho + delta * sol.q;
      CHECK((inv.array() - inv[0]).abs().maxCoeff() <=
            1e-12 * std::max(1.0, inv.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("reference node values") {
  Eigen::VectorXd r(3);
  r << -1.0, 0.0, -2.0;
  const MacroNodeSolution sol = macro_node_solve(3, 1.0, 0.5064, r);
  CHECK(sol.rho[1] == doctest::Approx(1.0 / 1.5064).epsilon(1e-12));
  CHECK(sol.q[1] == doctest::Approx(1.0 / 1.5064).epsilon(1e-12));
}
