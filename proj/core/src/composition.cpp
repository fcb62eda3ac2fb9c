#include "commact/composition.hpp"

#include <cmath>
#include <cstdint>
#include <utility>

namespace commact {

namespace {

// Deterministic uniform samples for the phase probe grid; identical across
// runs and platforms, unlike distribution adapters from <random>.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  double uniform(double lo, double hi) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
};

constexpr std::uint64_t kProbeSeed = 0x5eed0c0ffee5ULL;

struct OrderedPieces {
  const LagrangianSystem* first;
  const LagrangianSystem* second;
  double t_first;
  double t_second;
};

OrderedPieces ordered(const LagrangianSystem& system1, const LagrangianSystem& system2, double t1,
                      double t2, ComposeOrder order) {
  if (order == ComposeOrder::one_two) return {&system1, &system2, t1, t2};
  return {&system2, &system1, t2, t1};
}

std::pair<int, int> split_steps(int total, double t_first, double t_second) {
  int n_first = static_cast<int>(std::lround(total * t_first / (t_first + t_second)));
  n_first = std::max(1, std::min(total - 1, n_first));
  return {n_first, total - n_first};
}

PathSpec glued_spec(const OrderedPieces& op, const Vector& q0, const Vector& q12, int n_first,
                    int n_second) {
  PathSpec spec;
  spec.pieces.push_back(PathSpec::Piece{*op.first, op.t_first, n_first});
  spec.pieces.push_back(PathSpec::Piece{*op.second, op.t_second, n_second});
  spec.q_start = q0;
  spec.q_end = q12;
  return spec;
}

// One-sided momenta on both sides of the switch node of a glued path.
Vector junction_jump_of_path(const OrderedPieces& op, const DiscretePath& path) {
  const int j = path.switch_indices.at(0);
  const int total = path.segments();
  const double h_first = op.t_first / j;
  const double h_second = op.t_second / (total - j);
  const Vector before_a = path.points.row(j - 1);
  const Vector before_b = path.points.row(j);
  const Vector after_a = path.points.row(j);
  const Vector after_b = path.points.row(j + 1);
  const Vector p_minus = segment_momenta(*op.first, before_a, before_b, h_first).leaving;
  const Vector p_plus = segment_momenta(*op.second, after_a, after_b, h_second).entering;
  return p_minus - p_plus;
}

Vector stack(const Vector& a, const Vector& b) {
  Vector x(a.size() + b.size());
  x << a, b;
  return x;
}

void check_times(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    throw InvalidParameterError("composed action: both times must be positive");
  }
}

double floored_estimate(double raw, double s12, double s21) {
  const double scale = std::max({1.0, std::abs(s12), std::abs(s21)});
  return std::max(raw, 1e-12 * scale);
}

}  // namespace

ComposedActionResult composed_action(const LagrangianSystem& system1,
                                     const LagrangianSystem& system2, const Vector& q0,
                                     const Vector& q12, double t1, double t2, ComposeOrder order,
                                     const ComposeOptions& opts) {
  check_times(t1, t2);
  const OrderedPieces op = ordered(system1, system2, t1, t2, order);
  const auto [n_first, n_second] =
      split_steps(std::max(4, opts.start_steps), op.t_first, op.t_second);

  ActionResult refined = refine_path_action(glued_spec(op, q0, q12, n_first, n_second),
                                            opts.target_tol, opts.step_cap, opts.solve);

  ComposedActionResult result;
  result.order = order;
  result.value = refined.value;
  result.p_start = refined.p_start;
  result.p_end = refined.p_end;
  result.error_estimate = refined.error_estimate;
  result.resolution = refined.resolution;
  result.junction = refined.path.points.row(refined.path.switch_indices.at(0));
  result.junction_jump = junction_jump_of_path(op, refined.path);
  result.glued = std::move(refined);
  return result;
}

ComposedActionResult composed_action_fixed_junction(const LagrangianSystem& system1,
                                                    const LagrangianSystem& system2,
                                                    const Vector& q0, const Vector& q_junction,
                                                    const Vector& q12, double t1, double t2,
                                                    ComposeOrder order,
                                                    const ComposeOptions& opts) {
  check_times(t1, t2);
  const OrderedPieces op = ordered(system1, system2, t1, t2, order);
  const int start = std::max(2, opts.start_steps / 2);
  const ActionResult first = principal_action(*op.first, q0, q_junction, op.t_first,
                                              0.5 * opts.target_tol, start, opts.step_cap,
                                              opts.solve);
  const ActionResult second = principal_action(*op.second, q_junction, q12, op.t_second,
                                               0.5 * opts.target_tol, start, opts.step_cap,
                                               opts.solve);

  ComposedActionResult result;
  result.order = order;
  result.value = first.value + second.value;
  result.p_start = first.p_start;
  result.p_end = second.p_end;
  result.junction = q_junction;
  result.junction_jump = first.p_end - second.p_start;
  result.error_estimate = first.error_estimate + second.error_estimate;
  result.resolution = first.resolution + second.resolution;

  ActionResult glued;
  glued.value = result.value;
  const int rows1 = static_cast<int>(first.path.points.rows());
  const int rows2 = static_cast<int>(second.path.points.rows());
  glued.path.points.resize(rows1 + rows2 - 1, first.path.points.cols());
  glued.path.points.topRows(rows1) = first.path.points;
  glued.path.points.bottomRows(rows2 - 1) = second.path.points.bottomRows(rows2 - 1);
  glued.path.t_start = 0.0;
  glued.path.t_end = op.t_first + op.t_second;
  glued.path.switch_indices.push_back(rows1 - 1);
  glued.p_start = result.p_start;
  glued.p_end = result.p_end;
  glued.resolution = result.resolution;
  glued.error_estimate = result.error_estimate;
  glued.diag.converged = first.diag.converged && second.diag.converged;
  glued.diag.iterations = first.diag.iterations + second.diag.iterations;
  glued.diag.final_residual_norm =
      std::max(first.diag.final_residual_norm, second.diag.final_residual_norm);
  result.glued = std::move(glued);
  return result;
}

Vector junction_momentum_jump(const ComposedActionResult& result) { return result.junction_jump; }

CommutatorEstimate action_commutator(const LagrangianSystem& system1,
                                     const LagrangianSystem& system2, const Vector& q0,
                                     const Vector& q12, double t1, double t2,
                                     const ComposeOptions& opts) {
  CommutatorEstimate estimate;
  estimate.s12 = composed_action(system1, system2, q0, q12, t1, t2, ComposeOrder::one_two, opts);
  estimate.s21 = composed_action(system1, system2, q0, q12, t1, t2, ComposeOrder::two_one, opts);
  if (!estimate.s12.glued.diag.converged || !estimate.s21.glued.diag.converged) {
    throw NotConvergedError("action_commutator: a composed solve did not converge");
  }
  estimate.delta = estimate.s12.value - estimate.s21.value;
  estimate.error_estimate = estimate.s12.error_estimate + estimate.s21.error_estimate;
  return estimate;
}

ComposedDerivativeResiduals composed_action_derivatives(const LagrangianSystem& system1,
                                                        const LagrangianSystem& system2,
                                                        const Vector& q0, const Vector& q12,
                                                        double t1, double t2, double fd_step,
                                                        const ComposeOptions& opts) {
  check_times(t1, t2);
  const int n = static_cast<int>(q0.size());
  const ComposedActionResult base =
      composed_action(system1, system2, q0, q12, t1, t2, ComposeOrder::one_two, opts);
  const int n1_fine = base.glued.path.switch_indices.at(0);
  const int n2_fine = base.glued.resolution - n1_fine;
  const int n1_coarse = std::max(1, n1_fine / 2);
  const int n2_coarse = std::max(1, n2_fine / 2);

  // Extrapolated glued action at the step pair the base solve settled on.
  auto action = [&](const Vector& qa, const Vector& qb, double ta, double tb) {
    const OrderedPieces op = ordered(system1, system2, ta, tb, ComposeOrder::one_two);
    const double coarse =
        solve_path_action(glued_spec(op, qa, qb, n1_coarse, n2_coarse), opts.solve).value;
    const double fine =
        solve_path_action(glued_spec(op, qa, qb, n1_fine, n2_fine), opts.solve).value;
    return (4.0 * fine - coarse) / 3.0;
  };

  const HamiltonianSystem h1 = hamiltonian_of(system1);
  const HamiltonianSystem h2 = hamiltonian_of(system2);

  ComposedDerivativeResiduals res;
  res.r_q0.resize(n);
  res.r_q12.resize(n);
  for (int i = 0; i < n; ++i) {
    const double step = fd_step * std::max(1.0, std::abs(q0[i]));
    Vector qp = q0, qm = q0;
    qp[i] += step;
    qm[i] -= step;
    res.r_q0[i] = (action(qp, q12, t1, t2) - action(qm, q12, t1, t2)) / (2.0 * step) +
                  base.p_start[i];
  }
  for (int i = 0; i < n; ++i) {
    const double step = fd_step * std::max(1.0, std::abs(q12[i]));
    Vector qp = q12, qm = q12;
    qp[i] += step;
    qm[i] -= step;
    res.r_q12[i] = (action(q0, qp, t1, t2) - action(q0, qm, t1, t2)) / (2.0 * step) -
                   base.p_end[i];
  }
  {
    const double step = fd_step * std::max(1.0, t1);
    res.r_t1 = (action(q0, q12, t1 + step, t2) - action(q0, q12, t1 - step, t2)) / (2.0 * step) +
               h1.hamiltonian.value(stack(q0, base.p_start));
  }
  {
    const double step = fd_step * std::max(1.0, t2);
    res.r_t2 = (action(q0, q12, t1, t2 + step) - action(q0, q12, t1, t2 - step)) / (2.0 * step) +
               h2.hamiltonian.value(stack(q12, base.p_end));
  }
  return res;
}

EndpointMismatch endpoint_momentum_mismatch(const LagrangianSystem& system1,
                                            const LagrangianSystem& system2, const Vector& q0,
                                            const Vector& q12, double t1, double t2,
                                            const ComposeOptions& opts) {
  const CommutatorEstimate estimate = action_commutator(system1, system2, q0, q12, t1, t2, opts);
  EndpointMismatch mismatch;
  mismatch.d_p0 = estimate.s12.p_start - estimate.s21.p_start;
  mismatch.d_p12 = estimate.s12.p_end - estimate.s21.p_end;
  return mismatch;
}

EnergyTransportResiduals energy_transport_check(const LagrangianSystem& system1,
                                                const LagrangianSystem& system2, const Vector& q0,
                                                const Vector& q12, double t1, double t2,
                                                const ComposeOptions& opts) {
  const CommutatorEstimate estimate = action_commutator(system1, system2, q0, q12, t1, t2, opts);
  const HamiltonianSystem h1 = hamiltonian_of(system1);
  const HamiltonianSystem h2 = hamiltonian_of(system2);
  EnergyTransportResiduals res;
  res.r_h1 = h1.hamiltonian.value(stack(q0, estimate.s12.p_start)) -
             h1.hamiltonian.value(stack(q12, estimate.s21.p_end));
  res.r_h2 = h2.hamiltonian.value(stack(q0, estimate.s21.p_start)) -
             h2.hamiltonian.value(stack(q12, estimate.s12.p_end));
  return res;
}

double poisson_bracket(const HamiltonianSystem& h1, const HamiltonianSystem& h2,
                       const PhasePoint& x) {
  const int n = static_cast<int>(x.q.size());
  const Vector z = stack(x.q, x.p);
  const Vector g1 = h1.hamiltonian.gradient(z);
  const Vector g2 = h2.hamiltonian.gradient(z);
  double bracket = 0.0;
  for (int j = 0; j < n; ++j) {
    bracket += g1[n + j] * g2[j] - g1[j] * g2[n + j];
  }
  return bracket;
}

FlowCommutatorResult flow_commutator(const HamiltonianSystem& h1, const HamiltonianSystem& h2,
                                     const PhasePoint& x0, double t1, double t2, int steps) {
  FlowCommutatorResult result;
  const PhasePoint via1 = integrate_flow(h1, x0, t1, steps).back();
  result.endpoint_12 = integrate_flow(h2, via1, t2, steps).back();
  const PhasePoint via2 = integrate_flow(h2, x0, t2, steps).back();
  result.endpoint_21 = integrate_flow(h1, via2, t1, steps).back();
  const double dq = (result.endpoint_12.q - result.endpoint_21.q).lpNorm<Eigen::Infinity>();
  const double dp = (result.endpoint_12.p - result.endpoint_21.p).lpNorm<Eigen::Infinity>();
  result.norm = std::max(dq, dp);
  return result;
}

CommutativityReport commutativity_report(const LagrangianSystem& system1,
                                         const LagrangianSystem& system2,
                                         const ContinuousReportOptions& opts) {
  if (opts.grid < 1) throw InvalidGridError("commutativity_report: grid must be at least 1");
  if (opts.times.empty()) throw InvalidGridError("commutativity_report: times set is empty");
  if (system1.space.dimension != system2.space.dimension) {
    throw InvalidParameterError("commutativity_report: systems have different dimensions");
  }
  const int n = system1.space.dimension;

  const HamiltonianSystem h1 = hamiltonian_of(system1);
  const HamiltonianSystem h2 = hamiltonian_of(system2);

  CommutativityReport report;
  report.mode = "continuous";
  report.system1 = system1.name;
  report.system2 = system2.name;
  report.grid = opts.grid;
  report.qrange = opts.qrange;
  report.times = opts.times;
  report.tol = opts.tol;
  report.commuting_factor = opts.commuting_factor;
  report.noncommuting_factor = opts.noncommuting_factor;

  std::vector<double> grid_values;
  for (int i = 0; i < opts.grid; ++i) {
    grid_values.push_back(opts.grid == 1
                              ? 0.0
                              : -opts.qrange + 2.0 * opts.qrange * i / (opts.grid - 1));
  }

  ComposeOptions compose = opts.compose;
  compose.target_tol = opts.tol;

  for (double v0 : grid_values) {
    for (double v12 : grid_values) {
      const Vector q0 = Vector::Constant(n, v0);
      const Vector q12 = Vector::Constant(n, v12);
      for (const auto& [t1, t2] : opts.times) {
        ReportPoint point;
        point.q0 = q0;
        point.q12 = q12;
        point.t1 = t1;
        point.t2 = t2;
        try {
          const CommutatorEstimate est =
              action_commutator(system1, system2, q0, q12, t1, t2, compose);
          point.s12 = est.s12.value;
          point.s21 = est.s21.value;
          point.action_commutator = est.delta;
          point.error_estimate = floored_estimate(est.error_estimate, est.s12.value, est.s21.value);
          point.d_p0 = est.s12.p_start - est.s21.p_start;
          point.d_p12 = est.s12.p_end - est.s21.p_end;
          point.r_h1 = h1.hamiltonian.value(stack(q0, est.s12.p_start)) -
                       h1.hamiltonian.value(stack(q12, est.s21.p_end));
          point.r_h2 = h2.hamiltonian.value(stack(q0, est.s21.p_start)) -
                       h2.hamiltonian.value(stack(q12, est.s12.p_end));
          point.junction_jump_12 = est.s12.junction_jump.lpNorm<Eigen::Infinity>();
          point.junction_jump_21 = est.s21.junction_jump.lpNorm<Eigen::Infinity>();
          const PhasePoint induced{q0, est.s12.p_start};
          point.poisson_bracket = poisson_bracket(h1, h2, induced);
          point.flow_commutator =
              flow_commutator(h1, h2, induced, t1, t2, opts.flow_steps).norm;
        } catch (const Error& e) {
          point.ok = false;
          point.error = e.what();
        }
        report.points.push_back(std::move(point));
      }
    }
  }

  SplitMix rng(kProbeSeed);
  const int probe_count = opts.grid * opts.grid;
  for (int i = 0; i < probe_count; ++i) {
    PhaseProbe probe;
    probe.q.resize(n);
    probe.p.resize(n);
    for (int j = 0; j < n; ++j) probe.q[j] = rng.uniform(-opts.qrange, opts.qrange);
    for (int j = 0; j < n; ++j) probe.p[j] = rng.uniform(-opts.qrange, opts.qrange);
    try {
      const PhasePoint x{probe.q, probe.p};
      probe.poisson_bracket = poisson_bracket(h1, h2, x);
      double worst = 0.0;
      for (const auto& [t1, t2] : opts.times) {
        worst = std::max(worst, flow_commutator(h1, h2, x, t1, t2, opts.flow_steps).norm);
      }
      probe.flow_commutator = worst;
    } catch (const Error& e) {
      probe.ok = false;
      probe.error = e.what();
    }
    report.phase_probes.push_back(std::move(probe));
  }

  finalize_report(report);
  return report;
}

}  // namespace commact
