// Command-line front end: coupling coefficients, sweeps, node solves,
// network simulations, comparisons, and well-posedness audits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinnet/coupling.hpp"
#include "kinnet/layer.hpp"
#include "kinnet/netsim.hpp"

using namespace kinnet;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_out(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) throw config_error("cannot open output file: " + path);
  return f;
}

Family parse_family(const std::string& name) {
  if (name == "legendre") return Family::Legendre;
  if (name == "hermite") return Family::Hermite;
  throw config_error("unknown family '" + name +
                     "' (expected legendre or hermite)");
}

NodeDegree parse_degree(const std::string& text) {
  if (text == "inf" || text == "infinity") return NodeDegree::unbounded();
  try {
    size_t pos = 0;
    const int n = std::stoi(text, &pos);
    if (pos == text.size()) return NodeDegree::finite(n);
  } catch (const std::exception&) {
  }
  throw config_error("invalid edge count '" + text + "' (integer or inf)");
}

void require_min_n(int half_n) {
  if (half_n < 2) throw config_error("N must be >= 2");
}

void print_kv(std::FILE* f, const char* key, double value) {
  std::fprintf(f, "%s=%.17g\n", key, value);
}

LayerOperator build(Family family, NodeDegree degree, int half_n) {
  require_min_n(half_n);
  return build_layer(make_basis(family, 2 * half_n),
                     gauss_rule(family, 2 * half_n), degree);
}

void write_delta_record(std::FILE* f, const CouplingResult& r) {
  std::fprintf(f, "cmd=delta\nfamily=%s\nn=%s\nN=%d\n",
               family_name(r.family), r.degree.label().c_str(), r.half_n);
  print_kv(f, "delta", r.delta);
  for (int k = 0; k < r.chain.size(); ++k)
    std::fprintf(f, "delta_%d=%.17g\n", k + 1, r.chain[k]);
}

struct SimOptions {
  std::string mode = "kinetic";
  std::string family = "hermite";
  std::string degree = "3";
  int half_n = 16;
  double epsilon = 5e-3;
  double dx = 1e-3;
  double t_final = 0.1;
  double cfl = 0.9;
  double length = 0.5;
  std::vector<double> rho_init, q_init;
  double delta = std::nan("");
  int delta_half_n = 100;
};

NetworkConfig to_network_config(const SimOptions& o) {
  NetworkConfig cfg;
  cfg.family = parse_family(o.family);
  const NodeDegree deg = parse_degree(o.degree);
  if (deg.infinite)
    throw config_error("simulation requires a finite number of edges");
  cfg.n_edges = deg.n;
  cfg.half_n = o.half_n;
  cfg.epsilon = o.epsilon;
  cfg.dx = o.dx;
  cfg.t_final = o.t_final;
  cfg.cfl = o.cfl;
  cfg.edge_length.assign(cfg.n_edges, o.length);
  cfg.rho_init = o.rho_init;
  cfg.q_init = o.q_init;
  cfg.apply_defaults();
  cfg.validate();
  return cfg;
}

double resolve_delta(const SimOptions& o, const NetworkConfig& cfg) {
  if (std::isfinite(o.delta)) return o.delta;
  return compute_delta(build(cfg.family, NodeDegree::finite(cfg.n_edges),
                             o.delta_half_n))
      .delta;
}

void write_profiles(const std::string& prefix,
                    const std::vector<Eigen::VectorXd>& rho, double dx) {
  for (size_t e = 0; e < rho.size(); ++e) {
    auto f = open_out(prefix + "edge" + std::to_string(e + 1) + ".txt");
    for (int c = 0; c < rho[e].size(); ++c)
      std::fprintf(f.get(), "%.17g %.17g\n", (c + 0.5) * dx, rho[e][c]);
  }
}

// Optional plain key=value config file. Applied by injecting the missing
// flags before parsing, so command-line flags always win and unknown keys
// are rejected by the normal option machinery.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config") {
      if (std::next(it) == args.end())
        throw config_error("--config requires a file path");
      path = *std::next(it);
      it = args.erase(it, it + 2);
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file: " + path);
  const auto trim = [](std::string s) {
    const auto from = s.find_first_not_of(" \t\r");
    const auto to = s.find_last_not_of(" \t\r");
    return from == std::string::npos ? std::string()
                                     : s.substr(from, to - from + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) +
                         ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
    const std::string flag = "--" + key;
    const bool given =
        std::any_of(args.begin(), args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

void add_config_option(CLI::App* cmd) {
  static std::string sink;  // handled before parsing; listed for --help
  cmd->add_option("--config", sink,
                  "plain key=value config file (flags take precedence)");
}

void add_sim_options(CLI::App* cmd, SimOptions& o, bool with_mode) {
  if (with_mode)
    cmd->add_option("--mode", o.mode, "kinetic or macro")
        ->check(CLI::IsMember({"kinetic", "macro"}));
  cmd->add_option("--family", o.family, "legendre or hermite");
  cmd->add_option("--n", o.degree, "number of edges");
  cmd->add_option("--N", o.half_n, "velocity resolution (2N velocities)");
  cmd->add_option("--epsilon", o.epsilon, "relaxation parameter");
  cmd->add_option("--dx", o.dx, "cell size");
  cmd->add_option("--t-final", o.t_final, "final time");
  cmd->add_option("--cfl", o.cfl, "CFL number in (0,1)");
  cmd->add_option("--length", o.length, "edge length");
  cmd->add_option("--rho-init", o.rho_init, "per-edge initial densities")
      ->delimiter(',');
  cmd->add_option("--q-init", o.q_init, "per-edge initial fluxes")
      ->delimiter(',');
  cmd->add_option("--delta", o.delta,
                  "coupling coefficient for the macroscopic node (default: "
                  "spectral value)");
  cmd->add_option("--delta-N", o.delta_half_n,
                  "resolution used when computing delta spectrally");
}

int run(int argc, char** argv) {
  CLI::App app{
      "Coupling conditions for wave-limit kinetic models on star networks"};
  app.require_subcommand(1);

  // delta ------------------------------------------------------------------
  auto* cmd_delta = app.add_subcommand(
      "delta", "coupling coefficient delta and the invariant chain");
  std::string family_s = "legendre", degree_s = "3", out_path;
  int half_n = 100;
  add_config_option(cmd_delta);
  cmd_delta->add_option("--family", family_s, "legendre or hermite");
  cmd_delta->add_option("--n", degree_s, "number of edges, or inf");
  cmd_delta->add_option("--N", half_n, "velocity resolution (2N velocities)");
  cmd_delta->add_option("--out", out_path, "also write the record to a file");
  cmd_delta->callback([&]() {
    const CouplingResult r =
        compute_delta(build(parse_family(family_s), parse_degree(degree_s),
                            half_n));
    write_delta_record(stdout, r);
    if (!out_path.empty()) write_delta_record(open_out(out_path).get(), r);
  });

  // sweep ------------------------------------------------------------------
  auto* cmd_sweep =
      app.add_subcommand("sweep", "delta(N) over a range of resolutions");
  std::string sw_family = "legendre", sw_degree = "3";
  int n_lo = 2, n_hi = 100;
  std::string delta_out, increment_out;
  add_config_option(cmd_sweep);
  cmd_sweep->add_option("--family", sw_family, "legendre or hermite");
  cmd_sweep->add_option("--n", sw_degree, "number of edges, or inf");
  cmd_sweep->add_option("--N-min", n_lo, "first resolution");
  cmd_sweep->add_option("--N-max", n_hi, "last resolution");
  cmd_sweep->add_option("--delta-out", delta_out, "two-column file (N, delta)");
  cmd_sweep->add_option("--increment-out", increment_out,
                        "two-column file (N, log10 increment)");
  cmd_sweep->callback([&]() {
    const CouplingResult r = delta_sweep(parse_family(sw_family),
                                         parse_degree(sw_degree), n_lo, n_hi);
    std::fprintf(stdout, "cmd=sweep\nfamily=%s\nn=%s\nN_min=%d\nN_max=%d\n",
                 family_name(r.family), r.degree.label().c_str(), n_lo, n_hi);
    print_kv(stdout, "delta", r.delta);
    if (!delta_out.empty()) {
      auto f = open_out(delta_out);
      for (const auto& [n, d] : r.history)
        std::fprintf(f.get(), "%d %.17g\n", n, d);
    }
    if (!increment_out.empty()) {
      auto f = open_out(increment_out);
      for (size_t i = 0; i < r.increments.size(); ++i) {
        const double diff = r.history[i + 1].second - r.history[i].second;
        if (diff > 0.0)
          std::fprintf(f.get(), "%d %.17g\n", r.history[i + 1].first,
                       std::log10(diff));
      }
    }
  });

  // node-solve ---------------------------------------------------------------
  auto* cmd_node = app.add_subcommand(
      "node-solve", "solve the coupled node problem for all moments");
  std::string ns_family = "hermite", ns_degree = "3", dist_prefix;
  int ns_half_n = 100, v_count = 1001;
  std::vector<double> ns_rho, ns_q, ns_rminus;
  double v_max = 5.0;
  add_config_option(cmd_node);
  cmd_node->add_option("--family", ns_family, "legendre or hermite");
  cmd_node->add_option("--n", ns_degree, "number of edges");
  cmd_node->add_option("--N", ns_half_n, "velocity resolution");
  cmd_node->add_option("--rho-init", ns_rho, "per-edge far-field densities")
      ->delimiter(',');
  cmd_node->add_option("--q-init", ns_q, "per-edge far-field fluxes")
      ->delimiter(',');
  cmd_node->add_option("--r-minus", ns_rminus,
                       "outgoing characteristics (overrides rho/q)")
      ->delimiter(',');
  cmd_node->add_option("--distribution-out", dist_prefix,
                       "write nodal (v, f) samples per edge, plain and "
                       "Fejer-filtered (hermite only)");
  cmd_node->add_option("--v-max", v_max, "sample range [-v_max, v_max]");
  cmd_node->add_option("--v-count", v_count, "number of samples");
  cmd_node->callback([&]() {
    const Family family = parse_family(ns_family);
    const NodeDegree degree = parse_degree(ns_degree);
    if (degree.infinite)
      throw config_error("node-solve requires a finite number of edges");
    const LayerOperator op = build(family, degree, ns_half_n);

    Eigen::VectorXd r_minus;
    if (!ns_rminus.empty()) {
      r_minus = Eigen::Map<const Eigen::VectorXd>(ns_rminus.data(),
                                                  ns_rminus.size());
    } else {
      if (static_cast<int>(ns_rho.size()) != degree.n)
        throw config_error("need --rho-init with one value per edge");
      if (ns_q.empty()) ns_q.assign(degree.n, 0.0);
      r_minus.resize(degree.n);
      for (int e = 0; e < degree.n; ++e)
        r_minus[e] = ns_q[e] - op.basis.wave_speed * ns_rho[e];
    }
    const NodeState st = node_solve(op, r_minus);

    std::fprintf(stdout, "cmd=node-solve\nfamily=%s\nn=%d\nN=%d\n",
                 family_name(family), degree.n, ns_half_n);
    print_kv(stdout, "delta", st.delta);
    for (int e = 0; e < degree.n; ++e) {
      std::fprintf(stdout, "D_%d=%.17g\n", e + 1, st.rho_far[e]);
      std::fprintf(stdout, "C_%d=%.17g\n", e + 1, st.q_far[e]);
      std::fprintf(stdout, "rho0_%d=%.17g\n", e + 1, st.rho_node[e]);
    }

    if (!dist_prefix.empty()) {
      Eigen::VectorXd vs(v_count);
      for (int i = 0; i < v_count; ++i)
        vs[i] = -v_max + 2.0 * v_max * i / (v_count - 1);
      for (int e = 0; e < degree.n; ++e) {
        const Eigen::VectorXd plain =
            reconstruct_distribution(op, st, e, vs, false);
        const Eigen::VectorXd filtered =
            reconstruct_distribution(op, st, e, vs, true);
        const std::string tag = "edge" + std::to_string(e + 1);
        auto f = open_out(dist_prefix + tag + ".txt");
        auto g = open_out(dist_prefix + tag + "_filtered.txt");
        for (int i = 0; i < v_count; ++i) {
          std::fprintf(f.get(), "%.17g %.17g\n", vs[i], plain[i]);
          std::fprintf(g.get(), "%.17g %.17g\n", vs[i], filtered[i]);
        }
      }
    }
  });

  // simulate -----------------------------------------------------------------
  auto* cmd_sim =
      app.add_subcommand("simulate", "time-dependent solver on the star");
  SimOptions sim;
  std::string profile_prefix, node_dist_out;
  add_config_option(cmd_sim);
  add_sim_options(cmd_sim, sim, true);
  cmd_sim->add_option("--profile-out", profile_prefix,
                      "write per-edge (x, rho) profiles at the final time");
  cmd_sim->add_option("--node-distribution-out", node_dist_out,
                      "write per-edge (v, f) node samples (kinetic mode)");
  cmd_sim->callback([&]() {
    const NetworkConfig cfg = to_network_config(sim);
    const auto t0 = std::chrono::steady_clock::now();
    if (sim.mode == "macro") {
      const double delta = resolve_delta(sim, cfg);
      const MacroRunResult out = macro_simulate(cfg, delta);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      std::fprintf(stdout, "cmd=simulate\nmode=macro\nsteps=%d\n", out.steps);
      print_kv(stdout, "delta", delta);
      print_kv(stdout, "dt", out.dt);
      print_kv(stdout, "mass_initial", out.mass_initial);
      print_kv(stdout, "mass_final", out.mass_final);
      print_kv(stdout, "mass_balance_residual", out.mass_balance_residual);
      print_kv(stdout, "runtime_s", secs);
      if (!profile_prefix.empty())
        write_profiles(profile_prefix, out.rho, cfg.dx);
      return;
    }

    const KineticRunResult out = kinetic_simulate(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::fprintf(stdout, "cmd=simulate\nmode=kinetic\nsteps=%d\n", out.steps);
    print_kv(stdout, "dt", out.dt);
    print_kv(stdout, "mass_initial", out.mass_initial);
    print_kv(stdout, "mass_final", out.mass_final);
    print_kv(stdout, "mass_balance_residual", out.mass_balance_residual);
    print_kv(stdout, "node_flux_max", out.node_flux_max);
    print_kv(stdout, "runtime_s", secs);
    if (!profile_prefix.empty()) write_profiles(profile_prefix, out.rho, cfg.dx);
    if (!node_dist_out.empty()) {
      if (cfg.family != Family::Hermite)
        throw config_error(
            "node distribution output is defined for the hermite family");
      // Rescale the discrete values to the original velocity variable so the
      // samples overlay the spectral reconstruction.
      const DiscreteVelocityModel dvm = make_dvm(cfg.family, cfg.half_n);
      const QuadratureRule rule = gauss_rule(cfg.family, 2 * cfg.half_n);
      const OrthonormalBasis basis = make_basis(cfg.family, 1);
      for (int e = 0; e < cfg.n_edges; ++e) {
        auto f = open_out(node_dist_out + "edge" + std::to_string(e + 1) +
                          ".txt");
        for (int k = 0; k < dvm.n_vel; ++k) {
          const double h0 = eval_weighted_all(basis, 0, rule.nodes[k])[0];
          const double value = out.field.edges[e](k, 0) * h0 /
                               rule.weights_mod[k];
          std::fprintf(f.get(), "%.17g %.17g\n", dvm.speed[k], value);
        }
      }
    }
  });

  // compare ------------------------------------------------------------------
  auto* cmd_cmp = app.add_subcommand(
      "compare", "kinetic vs macroscopic run on the same geometry");
  SimOptions cmp;
  double layer_cutoff = std::nan("");
  add_config_option(cmd_cmp);
  add_sim_options(cmd_cmp, cmp, false);
  cmd_cmp->add_option("--layer-cutoff", layer_cutoff,
                      "ignore x below this (default 10 epsilon)");
  cmd_cmp->callback([&]() {
    const NetworkConfig cfg = to_network_config(cmp);
    const double delta = resolve_delta(cmp, cfg);
    const double cutoff =
        std::isfinite(layer_cutoff) ? layer_cutoff : 10.0 * cfg.epsilon;
    const KineticRunResult kin = kinetic_simulate(cfg);
    const MacroRunResult mac = macro_simulate(cfg, delta);
    const CompareReport rep = compare_runs(kin, mac, cfg, cutoff);
    std::fprintf(stdout, "cmd=compare\nedges=%d\n", cfg.n_edges);
    print_kv(stdout, "delta", delta);
    print_kv(stdout, "layer_cutoff", cutoff);
    print_kv(stdout, "kinetic_mass_balance_residual",
             kin.mass_balance_residual);
    for (int e = 0; e < cfg.n_edges; ++e) {
      std::fprintf(stdout, "max_diff_%d=%.17g\n", e + 1, rep.max_diff[e]);
      std::fprintf(stdout, "l1_diff_%d=%.17g\n", e + 1, rep.l1_diff[e]);
    }
  });

  // audit --------------------------------------------------------------------
  auto* cmd_audit = app.add_subcommand(
      "audit", "well-posedness audit of the coupled node problem");
  std::string au_family = "legendre", au_out;
  int au_n_lo = 2, au_n_hi = 50, au_e_lo = 2, au_e_hi = 10;
  add_config_option(cmd_audit);
  cmd_audit->add_option("--family", au_family, "legendre or hermite");
  cmd_audit->add_option("--N-min", au_n_lo, "first resolution");
  cmd_audit->add_option("--N-max", au_n_hi, "last resolution");
  cmd_audit->add_option("--n-min", au_e_lo, "smallest edge count");
  cmd_audit->add_option("--n-max", au_e_hi, "largest edge count");
  cmd_audit->add_option("--out", au_out, "also write the rows to a file");
  cmd_audit->callback([&]() {
    if (au_n_hi > 128)
      throw config_error(
          "audit: N above 128 overflows the unscaled dissipativity check");
    const AuditReport rep =
        wellposedness_audit(parse_family(au_family), au_n_lo, au_n_hi,
                            au_e_lo, au_e_hi);
    const auto write_rows = [&](std::FILE* f) {
      for (const auto& e : rep.entries)
        std::fprintf(f, "N=%d n=%d cond1=%.6g cond2=%.6g quad=%.6g %s\n",
                     e.half_n, e.n_edges, e.cond_b1, e.cond_b2, e.quad_form,
                     e.invertible && e.dissipative ? "invertible" : "FAIL");
      std::fprintf(f, "all_invertible=%d\nall_dissipative=%d\n",
                   rep.all_invertible ? 1 : 0, rep.all_dissipative ? 1 : 0);
    };
    std::fprintf(stdout, "cmd=audit\nfamily=%s\n", au_family.c_str());
    write_rows(stdout);
    if (!au_out.empty()) write_rows(open_out(au_out).get());
  });

  std::vector<std::string> args =
      apply_config_file({argv + 1, argv + argc});
  std::reverse(args.begin(), args.end());  // parse(vector) wants it reversed
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}
