// End-to-end acceptance checks.  Each check prints one PASS/FAIL line with
// its runtime; the process exits with the number of failed checks.
//
// usage: acceptance <path-to-cli> <scratch-dir>

#include "commact/composition.hpp"
#include "commact/discrete.hpp"
#include "commact/legendre.hpp"
#include "commact/trajectories.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace commact;

namespace {

std::string g_cli_path;
std::filesystem::path g_scratch;
int g_failures = 0;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

void run_criterion(int number, const std::string& label, double time_limit_s,
                   const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.require(elapsed < time_limit_s,
                "runtime " + std::to_string(elapsed) + " s exceeds " +
                    std::to_string(time_limit_s) + " s");
  if (check.ok) {
    std::printf("[PASS] %2d. %s  (%.2f s)\n", number, label.c_str(), elapsed);
  } else {
    std::printf("[FAIL] %2d. %s  (%.2f s): %s\n", number, label.c_str(), elapsed,
                check.detail.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double harmonic_action(double qa, double qb, double t) {
  return ((qa * qa + qb * qb) * std::cos(t) - 2.0 * qa * qb) / (2.0 * std::sin(t));
}

void write_spec(const std::string& name, const std::string& content) {
  std::ofstream out(g_scratch / name);
  out << content;
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > " + (g_scratch / "cli_stdout.txt").string() +
                          " 2> " + (g_scratch / "cli_stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SplitMix {
  std::uint64_t state;
  double uniform(double lo, double hi) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return lo + (hi - lo) * (static_cast<double>(z >> 11) * 0x1.0p-53);
  }
};

// --------------------------------------------------------------------------

void criterion_principal_action(Check& check) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto free1 = make_free_particle(1, 1.0);
  const ActionResult free_result = principal_action(free1, scalar(0.0), scalar(1.0), 1.0, 1e-10);
  const double free_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  check.require(std::abs(free_result.value - 0.5) <= 1e-10,
                "free action " + fmt(free_result.value) + " != 0.5 within 1e-10");
  check.require(free_elapsed < 1.0, "free solve took " + fmt(free_elapsed) + " s");

  const auto t1 = std::chrono::steady_clock::now();
  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  const ActionResult harm_result = principal_action(harmonic, scalar(0.0), scalar(1.0), 1.0, 1e-6);
  const double harm_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  const double exact = harmonic_action(0.0, 1.0, 1.0);  // cos(1)/(2 sin(1))
  check.require(std::abs(harm_result.value - exact) <= 1e-6,
                "harmonic action " + fmt(harm_result.value) + " vs closed form " + fmt(exact));
  check.require(harm_result.resolution <= 800,
                "harmonic refinement used " + std::to_string(harm_result.resolution) +
                    " segments (limit 800)");
  check.require(harm_elapsed < 1.0, "harmonic solve took " + fmt(harm_elapsed) + " s");
}

void criterion_convergence_order(Check& check) {
  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  const double exact = harmonic_action(0.0, 1.0, 1.0);
  double previous = 0.0;
  for (int n : {50, 100, 200, 400}) {
    const double error =
        std::abs(minimize_action(harmonic, scalar(0.0), scalar(1.0), 1.0, n).value - exact);
    if (previous > 0.0) {
      const double ratio = previous / error;
      check.require(ratio >= 3.5 && ratio <= 4.5,
                    "error ratio " + fmt(ratio) + " at n=" + std::to_string(n) +
                        " outside [3.5, 4.5]");
    }
    previous = error;
  }
}

void criterion_hamilton_jacobi(Check& check) {
  const std::vector<double> endpoints = {-0.5, 0.0, 0.5};
  const std::vector<double> times = {0.5, 1.0};
  for (int which = 0; which < 2; ++which) {
    const LagrangianSystem system =
        which == 0 ? make_free_particle(1, 1.0) : make_harmonic(1, 1.0, 1.0);
    const HamiltonianSystem hamiltonian = hamiltonian_of(system);
    for (double qa : endpoints) {
      for (double qb : endpoints) {
        for (double t : times) {
          const HJResiduals res = hj_check(system, hamiltonian, scalar(qa), scalar(qb), t);
          const double worst = std::max({std::abs(res.res_q_start[0]),
                                         std::abs(res.res_q_end[0]), std::abs(res.res_t)});
          check.require(worst <= 1e-5, system.name + " residual " + fmt(worst) + " at (" +
                                           fmt(qa) + "," + fmt(qb) + "," + fmt(t) + ")");
        }
      }
    }
  }
}

void criterion_commuting_pair(Check& check) {
  const auto light = make_free_particle(1, 1.0);
  const auto heavy = make_free_particle(1, 2.0);

  const ContinuousReportOptions opts;  // 5x5 grid, times {(0.5,0.5),(1,1)}
  const CommutativityReport report = commutativity_report(light, heavy, opts);
  check.require(report.verdict == Verdict::commuting,
                std::string("verdict ") + to_string(report.verdict));
  check.require(report.summary.max_action_commutator <=
                    report.commuting_factor * report.summary.max_error_estimate,
                "action commutator " + fmt(report.summary.max_action_commutator) +
                    " above 10x error estimate " + fmt(report.summary.max_error_estimate));
  check.require(report.phase_probes.size() == 25, "expected 25 phase probes");
  check.require(report.summary.max_poisson_bracket <= 1e-8,
                "poisson bracket " + fmt(report.summary.max_poisson_bracket));
  check.require(report.summary.max_flow_commutator <= 1e-6,
                "flow commutator " + fmt(report.summary.max_flow_commutator));
  check.require(report.summary.max_endpoint_mismatch <= 1e-5,
                "endpoint momentum mismatch " + fmt(report.summary.max_endpoint_mismatch));
  check.require(report.summary.max_junction_jump <= 1e-5,
                "junction momentum jump " + fmt(report.summary.max_junction_jump));
  check.require(report.summary.max_energy_residual <= 1e-5,
                "energy transport residual " + fmt(report.summary.max_energy_residual));

  // Derivative identities of the composed action over the same grid.
  for (double v0 : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
    for (double v12 : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
      for (const auto& [t1, t2] : opts.times) {
        const ComposedDerivativeResiduals res =
            composed_action_derivatives(light, heavy, scalar(v0), scalar(v12), t1, t2);
        const double worst = std::max({std::abs(res.r_q0[0]), std::abs(res.r_q12[0]),
                                       std::abs(res.r_t1), std::abs(res.r_t2)});
        check.require(worst <= 1e-5, "derivative residual " + fmt(worst) + " at (" + fmt(v0) +
                                         "," + fmt(v12) + "," + fmt(t1) + "," + fmt(t2) + ")");
      }
    }
  }

  const int rc = run_cli("check-commute --l1 " + (g_scratch / "free1.json").string() + " --l2 " +
                         (g_scratch / "free2.json").string() + " --out " +
                         (g_scratch / "commuting.json").string());
  check.require(rc == 0, "CLI exit code " + std::to_string(rc) + " (expected 0)");
  const std::string body = slurp(g_scratch / "commuting.json");
  check.require(body.find("\"verdict\": \"commuting\"") != std::string::npos,
                "report file lacks verdict commuting");
}

void criterion_noncommuting_pair(Check& check) {
  const auto free1 = make_free_particle(1, 1.0);
  const auto harmonic = make_harmonic(1, 1.0, 1.0);

  const CommutatorEstimate est =
      action_commutator(free1, harmonic, scalar(0.0), scalar(1.0), 1.0, 1.0);
  const double oracle = -0.3044895246152155;  // quadratic closed forms of both orders
  check.require(std::abs(est.delta - oracle) <= 1e-3,
                "commutator " + fmt(est.delta) + " vs oracle " + fmt(oracle));

  const HamiltonianSystem h1 = hamiltonian_of(free1);
  const HamiltonianSystem h2 = hamiltonian_of(harmonic);
  const double bracket = poisson_bracket(h1, h2, PhasePoint{scalar(1.0), scalar(1.0)});
  check.require(std::abs(bracket - 1.0) <= 1e-8, "bracket at (1,1) is " + fmt(bracket));

  const double flow_norm =
      flow_commutator(h1, h2, PhasePoint{scalar(0.0), scalar(1.0)}, 0.5, 0.5).norm;
  check.require(std::abs(flow_norm - 0.2397127693021015) <= 1e-4,
                "flow commutator " + fmt(flow_norm));

  const int rc = run_cli("check-commute --l1 " + (g_scratch / "free1.json").string() + " --l2 " +
                         (g_scratch / "harmonic.json").string() + " --out " +
                         (g_scratch / "noncommuting.json").string());
  check.require(rc == 1, "CLI exit code " + std::to_string(rc) + " (expected 1)");
  const std::string body = slurp(g_scratch / "noncommuting.json");
  check.require(body.find("\"verdict\": \"non-commuting\"") != std::string::npos,
                "report file lacks verdict non-commuting");
}

void criterion_discrete_commuting(Check& check) {
  const auto h1 = make_discrete_quadratic(1, 1.0);
  const auto h2 = make_discrete_quadratic(1, 2.0);

  const CornerSolution equal =
      solve_corner(h1, make_discrete_quadratic(1, 1.0), scalar(0.0), scalar(1.0));
  check.require(std::abs(equal.q_mid[0] - 0.5) <= 1e-12, "equal-h corner " + fmt(equal.q_mid[0]));
  const CornerSolution uneven = solve_corner(h1, h2, scalar(0.0), scalar(1.0));
  check.require(std::abs(uneven.q_mid[0] - 1.0 / 3.0) <= 1e-12,
                "uneven corner " + fmt(uneven.q_mid[0]));

  const std::vector<double> grid = {-0.5, -0.25, 0.0, 0.25, 0.5};
  for (double q0 : grid) {
    for (double q12 : grid) {
      const double delta = discrete_action_commutator(h1, h2, scalar(q0), scalar(q12));
      check.require(std::abs(delta) <= 1e-10, "commutator " + fmt(delta) + " at (" + fmt(q0) +
                                                  "," + fmt(q12) + ")");
      const CornerConsistency cc = corner_consistency_check(h1, h2, scalar(q0), scalar(q12));
      const double worst =
          std::max(cc.res_e0.lpNorm<Eigen::Infinity>(), cc.res_e12.lpNorm<Eigen::Infinity>());
      check.require(worst <= 1e-8, "corner residual " + fmt(worst));
    }
  }

  SplitMix rng{101};
  for (int probe = 0; probe < 25; ++probe) {
    const Vector q = scalar(rng.uniform(-0.5, 0.5));
    const Vector p = scalar(rng.uniform(-0.5, 0.5));
    const double norm = map_commutator(h1, h2, q, p).norm;
    check.require(norm <= 1e-8, "map commutator " + fmt(norm));
  }

  const DiscreteMapResult map = discrete_map(make_discrete_quadratic(1, 0.5), scalar(0.0),
                                             scalar(1.0));
  check.require(std::abs(map.q_next[0] + 0.5) <= 1e-12 && std::abs(map.p_next[0] - 1.0) <= 1e-12,
                "map image (" + fmt(map.q_next[0]) + "," + fmt(map.p_next[0]) +
                    ") != (-0.5, 1)");
}

void criterion_discrete_noncommuting(Check& check) {
  const auto quadratic = make_discrete_quadratic(1, 1.0);
  const auto kicked = make_discrete_kicked(1, 1.0, 0.3);

  // Frozen scan+Newton stationarity oracle for the 1-d composite values.
  const double oracle = -0.0952425511756887;
  const double delta = discrete_action_commutator(quadratic, kicked, scalar(0.0), scalar(1.0));
  check.require(std::abs(delta - oracle) <= 1e-8,
                "commutator " + fmt(delta) + " vs oracle " + fmt(oracle));
  check.require(std::abs(delta) > 1e-3, "commutator magnitude too small: " + fmt(delta));

  const double map_norm = map_commutator(quadratic, kicked, scalar(0.0), scalar(1.0)).norm;
  check.require(map_norm > 1e-3, "map commutator " + fmt(map_norm));

  const int rc = run_cli("check-commute-discrete --l1 " + (g_scratch / "dq1.json").string() +
                         " --l2 " + (g_scratch / "kicked.json").string() + " --out " +
                         (g_scratch / "discrete_noncommuting.json").string());
  check.require(rc == 1, "CLI exit code " + std::to_string(rc) + " (expected 1)");
}

void criterion_symplecticity(Check& check) {
  const std::vector<DiscreteLagrangian> systems = {
      make_discrete_quadratic(1, 1.0),
      make_discrete_quadratic(1, 0.5),
      make_discrete_kicked(1, 1.0, 0.3),
      make_discrete_kicked(1, 0.5, 1.0),
  };
  SplitMix rng{55};
  for (const auto& system : systems) {
    for (int probe = 0; probe < 50; ++probe) {
      const Vector q = scalar(rng.uniform(-1.5, 1.5));
      const Vector p = scalar(rng.uniform(-1.5, 1.5));
      const double defect = symplecticity_check(system, q, p);
      check.require(defect <= 1e-6, system.name + " defect " + fmt(defect) + " at (" +
                                        fmt(q[0]) + "," + fmt(p[0]) + ")");
    }
  }
}

void criterion_legendre_invariants(Check& check) {
  struct Probe {
    LagrangianSystem system;
    double v_lo, v_hi;
  };
  const std::vector<Probe> probes = {
      {make_free_particle(1, 1.0), -2.0, 2.0},
      {make_free_particle(2, 2.0), -2.0, 2.0},
      {make_harmonic(1, 1.0, 1.0), -2.0, 2.0},
      {make_harmonic(2, 1.5, 0.7), -2.0, 2.0},
      {make_quartic_kinetic(1), 0.2, 2.0},
  };
  SplitMix rng{8181};
  for (const Probe& probe : probes) {
    const int n = probe.system.space.dimension;
    const HamiltonianSystem hamiltonian = hamiltonian_of(probe.system);
    for (int trial = 0; trial < 100; ++trial) {
      Vector q(n), qdot(n);
      for (int i = 0; i < n; ++i) {
        q[i] = rng.uniform(-2.0, 2.0);
        qdot[i] = rng.uniform(probe.v_lo, probe.v_hi);
      }
      const Vector p = momentum_of_velocity(probe.system, q, qdot);
      const Vector back = velocity_of_momentum(probe.system, q, p, qdot);
      check.require((back - qdot).lpNorm<Eigen::Infinity>() <= 1e-8,
                    probe.system.name + ": velocity round trip failed");
      Vector qv(2 * n), qp(2 * n);
      qv << q, qdot;
      qp << q, p;
      const double identity = hamiltonian.hamiltonian.value(qp) +
                              probe.system.lagrangian.value(qv) - p.dot(qdot);
      check.require(std::abs(identity) <= 1e-8,
                    probe.system.name + ": Legendre identity residual " + fmt(identity));
    }
  }
}

void criterion_determinism(Check& check) {
  const std::string base = "check-commute --l1 " + (g_scratch / "free1.json").string() +
                           " --l2 " + (g_scratch / "free2.json").string() + " --grid 3";
  const int rc1 = run_cli(base + " --out " + (g_scratch / "det1.json").string());
  const int rc2 = run_cli(base + " --out " + (g_scratch / "det2.json").string());
  check.require(rc1 == 0 && rc2 == 0,
                "CLI exits " + std::to_string(rc1) + "/" + std::to_string(rc2));
  const std::string a = slurp(g_scratch / "det1.json");
  const std::string b = slurp(g_scratch / "det2.json");
  check.require(!a.empty(), "first report is empty");
  check.require(a == b, "reports differ between identical runs");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <cli-path> <scratch-dir>\n");
    return 2;
  }
  g_cli_path = argv[1];
  g_scratch = argv[2];
  std::filesystem::create_directories(g_scratch);

  write_spec("free1.json", R"({"kind":"builtin","name":"free_particle","params":{"mass":1.0},"dimension":1})");
  write_spec("free2.json", R"({"kind":"builtin","name":"free_particle","params":{"mass":2.0},"dimension":1})");
  write_spec("harmonic.json", R"({"kind":"builtin","name":"harmonic","params":{"mass":1.0,"omega":1.0},"dimension":1})");
  write_spec("dq1.json", R"({"kind":"builtin","name":"discrete_quadratic","params":{"h":1.0},"dimension":1})");
  write_spec("dq2.json", R"({"kind":"builtin","name":"discrete_quadratic","params":{"h":2.0},"dimension":1})");
  write_spec("kicked.json", R"({"kind":"builtin","name":"discrete_kicked","params":{"h":1.0,"K":0.3},"dimension":1})");

  run_criterion(1, "principal action accuracy (free exact, harmonic closed form)", 2.0,
                criterion_principal_action);
  run_criterion(2, "second-order convergence under step doubling", 5.0,
                criterion_convergence_order);
  run_criterion(3, "action-differential identities on the endpoint grid", 10.0,
                criterion_hamilton_jacobi);
  run_criterion(4, "commuting pair: actions, brackets, flows, momenta, energies", 60.0,
                criterion_commuting_pair);
  run_criterion(5, "non-commuting pair detection (free vs harmonic)", 30.0,
                criterion_noncommuting_pair);
  run_criterion(6, "discrete commuting pair: corners, commutators, maps", 5.0,
                criterion_discrete_commuting);
  run_criterion(7, "discrete non-commuting detection (quadratic vs kicked)", 5.0,
                criterion_discrete_noncommuting);
  run_criterion(8, "symplecticity of builtin discrete maps", 5.0, criterion_symplecticity);
  run_criterion(9, "velocity-momentum round trips and transform identity", 5.0,
                criterion_legendre_invariants);
  run_criterion(10, "byte-identical reports across identical runs", 30.0, criterion_determinism);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria failed\n", g_failures);
  }
  return g_failures;
}
