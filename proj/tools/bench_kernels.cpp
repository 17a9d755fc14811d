// Timing harness: OpenMP kernels against the serial reference. The two
// paths must agree bitwise; any nonzero deviation is reported as a failure.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kinnet/layer.hpp"
#include "kinnet/netsim.hpp"

using namespace kinnet;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void bench_kinetic_step() {
  NetworkConfig cfg;
  cfg.family = Family::Hermite;
  cfg.n_edges = 3;
  cfg.half_n = 16;
  cfg.epsilon = 5e-3;
  cfg.dx = 2.5e-4;  // 2000 cells per edge
  cfg.t_final = 0.1;
  cfg.rho_init = {1.0, 0.0, 2.0};
  cfg.q_init = {0.0, 0.0, 0.0};
  cfg.apply_defaults();
  cfg.validate();

  const DiscreteVelocityModel dvm = make_dvm(cfg.family, cfg.half_n);
  const double dt = kinetic_dt(dvm, cfg);
  const int steps = 400;

  KineticField serial = initial_kinetic_field(cfg, dvm);
  auto t0 = clock_type::now();
  for (int s = 0; s < steps; ++s)
    kinetic_step_reference(serial, dvm, cfg, dt);
  const double t_serial = seconds_since(t0);

  KineticField parallel = initial_kinetic_field(cfg, dvm);
  t0 = clock_type::now();
  for (int s = 0; s < steps; ++s) kinetic_step(parallel, dvm, cfg, dt);
  const double t_parallel = seconds_since(t0);

  double max_diff = 0.0;
  for (int e = 0; e < cfg.n_edges; ++e)
    max_diff = std::max(
        max_diff,
        (serial.edges[e] - parallel.edges[e]).cwiseAbs().maxCoeff());

  std::printf("kinetic_step   %4d steps  serial %7.3fs  omp %7.3fs  "
              "speedup %.2fx  max|diff| %g%s\n",
              steps, t_serial, t_parallel, t_serial / t_parallel, max_diff,
              max_diff == 0.0 ? "" : "  MISMATCH");
}

void bench_sweep() {
  const int n_lo = 2, n_hi = 80;
  auto t0 = clock_type::now();
  std::vector<double> serial;
  for (int half_n = n_lo; half_n <= n_hi; ++half_n)
    serial.push_back(
        compute_delta(build_layer(make_basis(Family::Hermite, 2 * half_n),
                                  gauss_rule(Family::Hermite, 2 * half_n),
                                  NodeDegree::finite(3)))
            .delta);
  const double t_serial = seconds_since(t0);

  t0 = clock_type::now();
  const CouplingResult sweep =
      delta_sweep(Family::Hermite, NodeDegree::finite(3), n_lo, n_hi);
  const double t_parallel = seconds_since(t0);

  double max_diff = 0.0;
  for (size_t i = 0; i < serial.size(); ++i)
    max_diff =
        std::max(max_diff, std::abs(serial[i] - sweep.history[i].second));

  std::printf("delta_sweep    N %d..%-3d   serial %7.3fs  omp %7.3fs  "
              "speedup %.2fx  max|diff| %g%s\n",
              n_lo, n_hi, t_serial, t_parallel, t_serial / t_parallel,
              max_diff, max_diff == 0.0 ? "" : "  MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", threads());
  bench_kinetic_step();
  bench_sweep();
  return 0;
}
