#include "commact/discrete.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <utility>

namespace commact {

namespace {

Vector stack(const Vector& a, const Vector& b) {
  Vector x(a.size() + b.size());
  x << a, b;
  return x;
}

// Derivative blocks of a two-point generating function.
Vector grad_first(const DiscreteLagrangian& s, const Vector& a, const Vector& b) {
  const int n = s.space.dimension;
  return s.generating.gradient(stack(a, b)).head(n);
}
Vector grad_second(const DiscreteLagrangian& s, const Vector& a, const Vector& b) {
  const int n = s.space.dimension;
  return s.generating.gradient(stack(a, b)).tail(n);
}

struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  double uniform(double lo, double hi) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return lo + (hi - lo) * (static_cast<double>(z >> 11) * 0x1.0p-53);
  }
};

constexpr std::uint64_t kProbeSeed = 0xd15c7e7e5eedULL;

}  // namespace

DiscreteMapResult discrete_map(const DiscreteLagrangian& system, const Vector& q0,
                               const Vector& p0, const Vector& q_guess,
                               const NewtonOptions& opts) {
  const int n = system.space.dimension;
  VectorField residual(
      n,
      [&system, &q0, &p0](const Vector& q1) -> Vector {
        return grad_first(system, q0, q1) - p0;
      },
      [&system, &q0, n](const Vector& q1) -> Matrix {
        return system.generating.hessian(stack(q0, q1)).topRightCorner(n, n);
      });
  const NewtonResult solve = newton_solve(residual, q_guess, opts);
  DiscreteMapResult result;
  result.q_next = solve.root;
  result.p_next = -grad_second(system, q0, solve.root);
  result.diag = solve.diag;
  return result;
}

DiscreteMapResult discrete_map(const DiscreteLagrangian& system, const Vector& q0,
                               const Vector& p0) {
  return discrete_map(system, q0, p0, q0);
}

CornerSolution solve_corner(const DiscreteLagrangian& first, const DiscreteLagrangian& second,
                            const Vector& q0, const Vector& q12, const Vector& q_guess,
                            const NewtonOptions& opts) {
  const int n = first.space.dimension;
  if (second.space.dimension != n || q0.size() != n || q12.size() != n) {
    throw InvalidParameterError("solve_corner: dimension mismatch");
  }

  auto corner = [n, &opts](const DiscreteLagrangian& a, const DiscreteLagrangian& b,
                           const Vector& left, const Vector& right, const Vector& guess) {
    VectorField residual(
        n,
        [&a, &b, &left, &right](const Vector& q) -> Vector {
          return grad_second(a, left, q) + grad_first(b, q, right);
        },
        [&a, &b, &left, &right, n](const Vector& q) -> Matrix {
          return a.generating.hessian(stack(left, q)).bottomRightCorner(n, n) +
                 b.generating.hessian(stack(q, right)).topLeftCorner(n, n);
        });
    return newton_solve(residual, guess, opts);
  };

  const NewtonResult direct = corner(first, second, q0, q12, q_guess);
  const NewtonResult swapped = corner(second, first, q0, q12, q_guess);

  CornerSolution solution;
  solution.q_mid = direct.root;
  solution.q_mid_swapped = swapped.root;
  solution.diag_first = direct.diag;
  solution.diag_second = swapped.diag;
  solution.res_e1 =
      grad_second(first, q0, direct.root) + grad_first(second, direct.root, q12);
  solution.res_e2 =
      grad_second(second, q0, swapped.root) + grad_first(first, swapped.root, q12);
  solution.res_e0 = grad_first(first, q0, direct.root) - grad_first(second, q0, swapped.root);
  solution.res_e12 =
      grad_second(first, swapped.root, q12) - grad_second(second, direct.root, q12);
  solution.s12 = first.generating.value(stack(q0, direct.root)) +
                 second.generating.value(stack(direct.root, q12));
  solution.s21 = second.generating.value(stack(q0, swapped.root)) +
                 first.generating.value(stack(swapped.root, q12));
  return solution;
}

CornerSolution solve_corner(const DiscreteLagrangian& first, const DiscreteLagrangian& second,
                            const Vector& q0, const Vector& q12) {
  return solve_corner(first, second, q0, q12, 0.5 * (q0 + q12));
}

DiscreteComposedAction discrete_composed_action(const DiscreteLagrangian& system1,
                                                const DiscreteLagrangian& system2,
                                                const Vector& q0, const Vector& q12,
                                                ComposeOrder order, const NewtonOptions& opts) {
  const DiscreteLagrangian& first = order == ComposeOrder::one_two ? system1 : system2;
  const DiscreteLagrangian& second = order == ComposeOrder::one_two ? system2 : system1;
  const CornerSolution corner = solve_corner(first, second, q0, q12, 0.5 * (q0 + q12), opts);

  DiscreteComposedAction result;
  result.value = corner.s12;
  result.q_mid = corner.q_mid;
  result.diag = corner.diag_first;

  const int n = first.space.dimension;
  const Matrix hess =
      first.generating.hessian(stack(q0, corner.q_mid)).bottomRightCorner(n, n) +
      second.generating.hessian(stack(corner.q_mid, q12)).topLeftCorner(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  result.hessian_positive_definite = es.eigenvalues().minCoeff() > 0.0;
  return result;
}

double discrete_action_commutator(const DiscreteLagrangian& system1,
                                  const DiscreteLagrangian& system2, const Vector& q0,
                                  const Vector& q12, const NewtonOptions& opts) {
  const CornerSolution corner = solve_corner(system1, system2, q0, q12, 0.5 * (q0 + q12), opts);
  if (!corner.diag_first.converged || !corner.diag_second.converged) {
    throw NotConvergedError("discrete_action_commutator: a corner solve did not converge");
  }
  return corner.s12 - corner.s21;
}

CornerConsistency corner_consistency_check(const DiscreteLagrangian& system1,
                                           const DiscreteLagrangian& system2, const Vector& q0,
                                           const Vector& q12, const NewtonOptions& opts) {
  const CornerSolution corner = solve_corner(system1, system2, q0, q12, 0.5 * (q0 + q12), opts);
  if (!corner.diag_first.converged || !corner.diag_second.converged) {
    throw NotConvergedError("corner_consistency_check: a corner solve did not converge");
  }
  return CornerConsistency{corner.res_e0, corner.res_e12};
}

MapCommutatorResult map_commutator(const DiscreteLagrangian& system1,
                                   const DiscreteLagrangian& system2, const Vector& q0,
                                   const Vector& p0, const NewtonOptions& opts) {
  auto apply = [&opts](const DiscreteLagrangian& s, const PhasePoint& x) {
    const DiscreteMapResult step = discrete_map(s, x.q, x.p, x.q, opts);
    if (!step.diag.converged) {
      throw NotConvergedError("map_commutator: implicit map solve did not converge for '" +
                              s.name + "'");
    }
    return PhasePoint{step.q_next, step.p_next};
  };
  MapCommutatorResult result;
  result.x_12 = apply(system2, apply(system1, PhasePoint{q0, p0}));
  result.x_21 = apply(system1, apply(system2, PhasePoint{q0, p0}));
  result.norm = std::max((result.x_12.q - result.x_21.q).lpNorm<Eigen::Infinity>(),
                         (result.x_12.p - result.x_21.p).lpNorm<Eigen::Infinity>());
  return result;
}

double symplecticity_check(const DiscreteLagrangian& system, const Vector& q0, const Vector& p0,
                           double fd_step, const NewtonOptions& opts) {
  const int n = system.space.dimension;
  const DiscreteMapResult base = discrete_map(system, q0, p0, q0, opts);
  if (!base.diag.converged) {
    throw NotConvergedError("symplecticity_check: base map solve did not converge");
  }

  // Central-difference Jacobian of (q,p) -> (q_next,p_next); every probe
  // starts Newton from the base image to stay on the same branch.
  auto apply = [&](const Vector& q, const Vector& p) -> Vector {
    const DiscreteMapResult step = discrete_map(system, q, p, base.q_next, opts);
    if (!step.diag.converged) {
      throw NotConvergedError("symplecticity_check: probe map solve did not converge");
    }
    return stack(step.q_next, step.p_next);
  };

  Matrix df(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    const bool is_q = j < n;
    const double base_coord = is_q ? q0[j] : p0[j - n];
    const double h = fd_step * std::max(1.0, std::abs(base_coord));
    Vector qp = q0, pp = p0, qm = q0, pm = p0;
    if (is_q) {
      qp[j] += h;
      qm[j] -= h;
    } else {
      pp[j - n] += h;
      pm[j - n] -= h;
    }
    df.col(j) = (apply(qp, pp) - apply(qm, pm)) / (2.0 * h);
  }

  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Matrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  const Matrix defect = df.transpose() * omega * df - omega;
  return defect.cwiseAbs().maxCoeff();
}

CommutativityReport discrete_commutativity_report(const DiscreteLagrangian& system1,
                                                  const DiscreteLagrangian& system2,
                                                  const DiscreteReportOptions& opts) {
  if (opts.grid < 1) throw InvalidGridError("discrete report: grid must be at least 1");
  if (system1.space.dimension != system2.space.dimension) {
    throw InvalidParameterError("discrete report: systems have different dimensions");
  }
  const int n = system1.space.dimension;

  NewtonOptions newton;
  newton.tol = opts.tol;

  CommutativityReport report;
  report.mode = "discrete";
  report.system1 = system1.name;
  report.system2 = system2.name;
  report.grid = opts.grid;
  report.qrange = opts.qrange;
  report.tol = opts.tol;
  report.commuting_factor = opts.commuting_factor;
  report.noncommuting_factor = opts.noncommuting_factor;

  std::vector<double> grid_values;
  for (int i = 0; i < opts.grid; ++i) {
    grid_values.push_back(opts.grid == 1
                              ? 0.0
                              : -opts.qrange + 2.0 * opts.qrange * i / (opts.grid - 1));
  }

  for (double v0 : grid_values) {
    for (double v12 : grid_values) {
      ReportPoint point;
      point.q0 = Vector::Constant(n, v0);
      point.q12 = Vector::Constant(n, v12);
      try {
        const CornerSolution corner =
            solve_corner(system1, system2, point.q0, point.q12,
                         0.5 * (point.q0 + point.q12), newton);
        if (!corner.diag_first.converged || !corner.diag_second.converged) {
          throw NotConvergedError("corner solve did not converge");
        }
        point.s12 = corner.s12;
        point.s21 = corner.s21;
        point.action_commutator = corner.s12 - corner.s21;
        point.error_estimate = std::max(
            {opts.tol, corner.res_e1.lpNorm<Eigen::Infinity>(),
             corner.res_e2.lpNorm<Eigen::Infinity>()});
        point.corner_e0 = corner.res_e0;
        point.corner_e12 = corner.res_e12;
      } catch (const Error& e) {
        point.ok = false;
        point.error = e.what();
      }
      report.points.push_back(std::move(point));
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
      probe.flow_commutator = map_commutator(system1, system2, probe.q, probe.p, newton).norm;
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
