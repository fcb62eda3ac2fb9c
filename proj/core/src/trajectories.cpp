#include "commact/trajectories.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <utility>

namespace commact {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SegmentTable {
  std::vector<int> piece;   // piece index per segment
  std::vector<double> h;    // step per segment
  std::vector<double> t0;   // segment start time
};

SegmentTable build_segments(const PathSpec& spec) {
  SegmentTable table;
  double t = 0.0;
  for (int pi = 0; pi < static_cast<int>(spec.pieces.size()); ++pi) {
    const auto& piece = spec.pieces[pi];
    const double h = piece.duration / piece.steps;
    for (int s = 0; s < piece.steps; ++s) {
      table.piece.push_back(pi);
      table.h.push_back(h);
      table.t0.push_back(t);
      t += h;
    }
  }
  return table;
}

void validate_spec(const PathSpec& spec) {
  if (spec.pieces.empty()) throw InvalidParameterError("path: no pieces");
  const int n = static_cast<int>(spec.q_start.size());
  if (static_cast<int>(spec.q_end.size()) != n) {
    throw InvalidParameterError("path: endpoint dimensions differ");
  }
  for (const auto& piece : spec.pieces) {
    if (!(piece.duration > 0.0)) throw InvalidParameterError("path: piece duration must be positive");
    if (piece.steps < 1) throw InvalidParameterError("path: piece needs at least one step");
    if (piece.system.space.dimension != n) {
      throw InvalidParameterError("path: system dimension does not match endpoints");
    }
    if (piece.duration >= piece.system.max_segment_time) {
      throw TimeHorizonError("path: segment duration " + std::to_string(piece.duration) +
                             " reaches the time horizon of system '" + piece.system.name + "'");
    }
  }
}

// Gradient and Hessian of one segment's contribution h*L(mid, vel) with
// respect to its two endpoints, via the chain rule through (mid, vel).
struct SegmentDerivatives {
  double value;
  Vector grad;  // 2n: d/da then d/db
  Matrix hess;  // 2n x 2n
};

SegmentDerivatives segment_derivatives(const LagrangianSystem& system, const Vector& a,
                                       const Vector& b, double h, bool with_hessian) {
  const int n = static_cast<int>(a.size());
  Vector z(2 * n);
  z.head(n) = 0.5 * (a + b);
  z.tail(n) = (b - a) / h;

  SegmentDerivatives d;
  d.value = h * system.lagrangian.value(z);
  const Vector g = system.lagrangian.gradient(z);
  const Vector gu = g.head(n);  // dL/dq at the midpoint
  const Vector gw = g.tail(n);  // dL/dqdot
  d.grad.resize(2 * n);
  d.grad.head(n) = 0.5 * h * gu - gw;
  d.grad.tail(n) = 0.5 * h * gu + gw;
  if (with_hessian) {
    Matrix t = Matrix::Zero(2 * n, 2 * n);
    t.topLeftCorner(n, n) = 0.5 * Matrix::Identity(n, n);
    t.topRightCorner(n, n) = 0.5 * Matrix::Identity(n, n);
    t.bottomLeftCorner(n, n) = -Matrix::Identity(n, n) / h;
    t.bottomRightCorner(n, n) = Matrix::Identity(n, n) / h;
    d.hess = h * t.transpose() * system.lagrangian.hessian(z) * t;
  }
  return d;
}

class PathProblem {
 public:
  PathProblem(const PathSpec& spec, const SegmentTable& table)
      : spec_(spec), table_(table), n_(static_cast<int>(spec.q_start.size())),
        total_(spec.total_steps()) {}

  int interior_count() const { return total_ - 1; }
  int unknowns() const { return interior_count() * n_; }

  Vector point(const Vector& x, int k) const {
    if (k == 0) return spec_.q_start;
    if (k == total_) return spec_.q_end;
    return x.segment((k - 1) * n_, n_);
  }

  double value(const Vector& x) const {
    double total = 0.0;
    for (int s = 0; s < total_; ++s) {
      Vector z(2 * n_);
      const Vector a = point(x, s);
      const Vector b = point(x, s + 1);
      z.head(n_) = 0.5 * (a + b);
      z.tail(n_) = (b - a) / table_.h[s];
      total += table_.h[s] * spec_.pieces[table_.piece[s]].system.lagrangian.value(z);
    }
    return total;
  }

  // Returns false if any derivative came out non-finite.
  bool assemble(const Vector& x, double& value, Vector& grad, std::vector<Triplet>* triplets) const {
    value = 0.0;
    grad.setZero(unknowns());
    if (triplets) triplets->clear();
    for (int s = 0; s < total_; ++s) {
      const Vector a = point(x, s);
      const Vector b = point(x, s + 1);
      const auto d = segment_derivatives(spec_.pieces[table_.piece[s]].system, a, b, table_.h[s],
                                         triplets != nullptr);
      if (!std::isfinite(d.value) || !d.grad.allFinite()) return false;
      if (triplets && !d.hess.allFinite()) return false;
      value += d.value;
      const int ia = s - 1;      // interior index of a, -1 if boundary
      const int ib = s;          // interior index of b, == interior_count() if boundary
      if (ia >= 0) grad.segment(ia * n_, n_) += d.grad.head(n_);
      if (ib < interior_count()) grad.segment(ib * n_, n_) += d.grad.tail(n_);
      if (triplets) {
        auto scatter = [&](int bi, int bj, int oi, int oj) {
          for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c)
              triplets->emplace_back(bi * n_ + r, bj * n_ + c, d.hess(oi * n_ + r, oj * n_ + c));
        };
        if (ia >= 0) scatter(ia, ia, 0, 0);
        if (ia >= 0 && ib < interior_count()) {
          scatter(ia, ib, 0, 1);
          scatter(ib, ia, 1, 0);
        }
        if (ib < interior_count()) scatter(ib, ib, 1, 1);
      }
    }
    return true;
  }

 private:
  const PathSpec& spec_;
  const SegmentTable& table_;
  int n_;
  int total_;
};

Vector initial_guess(const PathSpec& spec, const SegmentTable& table, int n) {
  const int interior = spec.total_steps() - 1;
  double duration = 0.0;
  for (const auto& piece : spec.pieces) duration += piece.duration;
  Vector x(interior * n);
  for (int k = 1; k <= interior; ++k) {
    const double t = table.t0[k];  // node k starts segment k
    const double frac = t / duration;
    x.segment((k - 1) * n, n) = (1.0 - frac) * spec.q_start + frac * spec.q_end;
  }
  return x;
}

DiscretePath build_path(const PathSpec& spec, const PathProblem& problem, const Vector& x) {
  DiscretePath path;
  const int n = static_cast<int>(spec.q_start.size());
  const int total = spec.total_steps();
  path.points.resize(total + 1, n);
  for (int k = 0; k <= total; ++k) path.points.row(k) = problem.point(x, k).transpose();
  path.t_start = 0.0;
  double duration = 0.0;
  for (const auto& piece : spec.pieces) duration += piece.duration;
  path.t_end = duration;
  int offset = 0;
  for (std::size_t i = 0; i + 1 < spec.pieces.size(); ++i) {
    offset += spec.pieces[i].steps;
    path.switch_indices.push_back(offset);
  }
  return path;
}

}  // namespace

SegmentMomenta segment_momenta(const LagrangianSystem& system, const Vector& a, const Vector& b,
                               double h) {
  const int n = static_cast<int>(a.size());
  Vector z(2 * n);
  z.head(n) = 0.5 * (a + b);
  z.tail(n) = (b - a) / h;
  const Vector g = system.lagrangian.gradient(z);
  SegmentMomenta m;
  m.entering = g.tail(n) - 0.5 * h * g.head(n);
  m.leaving = g.tail(n) + 0.5 * h * g.head(n);
  return m;
}

ActionResult solve_path_action(const PathSpec& spec, const PathSolveOptions& opts) {
  validate_spec(spec);
  const SegmentTable table = build_segments(spec);
  const int n = static_cast<int>(spec.q_start.size());
  PathProblem problem(spec, table);

  ActionResult result;
  result.resolution = spec.total_steps();

  Vector x = initial_guess(spec, table, n);
  const int m = problem.unknowns();

  double value = 0.0;
  Vector grad(std::max(m, 1));
  std::vector<Triplet> triplets;
  if (!problem.assemble(x, value, grad, &triplets)) {
    throw NonFiniteEvaluationError("path solve: non-finite action derivatives at the initial path");
  }

  bool converged = false;
  int iter = 0;
  if (m == 0) {
    converged = true;  // no interior freedom; the two-point path is the solution
    result.diag.final_residual_norm = 0.0;
  } else {
    Eigen::SimplicialLLT<SparseMatrix> llt;
    for (; iter <= opts.max_iter; ++iter) {
      const double gnorm = grad.lpNorm<Eigen::Infinity>();
      if (gnorm <= opts.tol) {
        converged = true;
        break;
      }
      if (iter == opts.max_iter) break;

      SparseMatrix hess(m, m);
      hess.setFromTriplets(triplets.begin(), triplets.end());
      double max_diag = 0.0;
      for (int i = 0; i < m; ++i) max_diag = std::max(max_diag, std::abs(hess.coeff(i, i)));

      // Shift the diagonal until the factorization goes through; the shift is
      // dropped again as soon as the iterate moves.
      llt.compute(hess);
      double tau = std::max(1e-12, 1e-10 * max_diag);
      SparseMatrix identity(m, m);
      identity.setIdentity();
      while (llt.info() != Eigen::Success && tau < 1e8 * std::max(1.0, max_diag)) {
        llt.compute(hess + tau * identity);
        tau *= 10.0;
      }
      if (llt.info() != Eigen::Success) break;

      const Vector direction = llt.solve(-grad);
      const double slope = grad.dot(direction);
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Vector x_try = x + step * direction;
        const double f_try = problem.value(x_try);
        if (std::isfinite(f_try) && f_try <= value + 1e-4 * step * slope) {
          x = x_try;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      if (!problem.assemble(x, value, grad, &triplets)) break;
    }
    result.diag.final_residual_norm = grad.lpNorm<Eigen::Infinity>();
  }

  result.diag.iterations = iter;
  result.diag.converged = converged;

  if (m > 0) {
    SparseMatrix hess(m, m);
    hess.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLLT<SparseMatrix> llt(hess);
    result.diag.hessian_positive_definite = llt.info() == Eigen::Success;
  } else {
    result.diag.hessian_positive_definite = true;
  }

  result.value = value;
  result.path = build_path(spec, problem, x);

  const auto first = segment_momenta(spec.pieces.front().system, problem.point(x, 0),
                                     problem.point(x, 1), table.h.front());
  const auto last = segment_momenta(spec.pieces.back().system,
                                    problem.point(x, spec.total_steps() - 1),
                                    problem.point(x, spec.total_steps()), table.h.back());
  result.p_start = first.entering;
  result.p_end = last.leaving;
  return result;
}

ActionResult refine_path_action(PathSpec spec, double target_tol, int step_cap,
                                const PathSolveOptions& opts) {
  ActionResult coarse = solve_path_action(spec, opts);
  while (true) {
    PathSpec finer = spec;
    for (auto& piece : finer.pieces) piece.steps *= 2;

    ActionResult fine = solve_path_action(finer, opts);
    if (!coarse.diag.converged || !fine.diag.converged) {
      fine.error_estimate = kInf;
      fine.diag.converged = false;
      return fine;
    }

    ActionResult combined = fine;
    combined.value = (4.0 * fine.value - coarse.value) / 3.0;
    combined.p_start = (4.0 * fine.p_start - coarse.p_start) / 3.0;
    combined.p_end = (4.0 * fine.p_end - coarse.p_end) / 3.0;
    combined.error_estimate = std::abs(fine.value - coarse.value) / 3.0;

    if (combined.error_estimate <= target_tol) return combined;
    if (2 * finer.total_steps() > step_cap) {
      throw ResolutionCapError("step refinement hit the cap of " + std::to_string(step_cap) +
                                   " segments before reaching tolerance " +
                                   std::to_string(target_tol),
                               std::move(combined));
    }
    spec = std::move(finer);
    coarse = std::move(fine);
  }
}

ActionResult minimize_action(const LagrangianSystem& system, const Vector& q_start,
                             const Vector& q_end, double t, int steps,
                             const PathSolveOptions& opts) {
  if (!(t > 0.0)) throw InvalidParameterError("minimize_action: t must be positive");
  if (steps < 2) throw InvalidParameterError("minimize_action: need at least two steps");
  PathSpec spec{{PathSpec::Piece{system, t, steps}}, q_start, q_end};
  return solve_path_action(spec, opts);
}

ActionResult principal_action(const LagrangianSystem& system, const Vector& q_start,
                              const Vector& q_end, double t, double target_tol, int start_steps,
                              int step_cap, const PathSolveOptions& opts) {
  if (!(t > 0.0)) throw InvalidParameterError("principal_action: t must be positive");
  PathSpec spec{{PathSpec::Piece{system, t, std::max(2, start_steps)}}, q_start, q_end};
  return refine_path_action(std::move(spec), target_tol, step_cap, opts);
}

double euler_lagrange_residual(const LagrangianSystem& system, const DiscretePath& path) {
  const int segments = path.segments();
  if (segments < 2) throw InvalidParameterError("euler_lagrange_residual: need at least 3 points");
  const double h = (path.t_end - path.t_start) / segments;
  double residual = 0.0;
  SegmentMomenta prev = segment_momenta(system, path.points.row(0), path.points.row(1), h);
  for (int k = 1; k < segments; ++k) {
    const SegmentMomenta next =
        segment_momenta(system, path.points.row(k), path.points.row(k + 1), h);
    // d(action)/dq_k = (leaving momentum of [k-1,k]) - (entering momentum of [k,k+1])
    const Vector r = prev.leaving - next.entering;
    residual = std::max(residual, r.lpNorm<Eigen::Infinity>());
    prev = next;
  }
  return residual;
}

HJResiduals hj_check(const LagrangianSystem& system, const HamiltonianSystem& hamiltonian,
                     const Vector& q_start, const Vector& q_end, double t, double fd_step,
                     double target_tol) {
  const int n = static_cast<int>(q_start.size());
  const ActionResult base = principal_action(system, q_start, q_end, t, target_tol);
  const int fine = base.resolution;
  const int coarse = std::max(2, fine / 2);

  // Extrapolated action at the resolution pair the base solve settled on;
  // keeping the pair fixed lets the leading discretization bias cancel in
  // the central differences below.
  auto action = [&](const Vector& qa, const Vector& qb, double tt) {
    const ActionResult c = minimize_action(system, qa, qb, tt, coarse);
    const ActionResult f = minimize_action(system, qa, qb, tt, fine);
    return (4.0 * f.value - c.value) / 3.0;
  };

  HJResiduals res;
  res.res_q_start.resize(n);
  res.res_q_end.resize(n);
  for (int i = 0; i < n; ++i) {
    const double step = fd_step * std::max(1.0, std::abs(q_start[i]));
    Vector qp = q_start, qm = q_start;
    qp[i] += step;
    qm[i] -= step;
    res.res_q_start[i] =
        (action(qp, q_end, t) - action(qm, q_end, t)) / (2.0 * step) + base.p_start[i];
  }
  for (int i = 0; i < n; ++i) {
    const double step = fd_step * std::max(1.0, std::abs(q_end[i]));
    Vector qp = q_end, qm = q_end;
    qp[i] += step;
    qm[i] -= step;
    res.res_q_end[i] =
        (action(q_start, qp, t) - action(q_start, qm, t)) / (2.0 * step) - base.p_end[i];
  }
  const double tstep = fd_step * std::max(1.0, t);
  Vector state(2 * n);
  state << q_end, base.p_end;
  res.res_t = (action(q_start, q_end, t + tstep) - action(q_start, q_end, t - tstep)) /
                  (2.0 * tstep) +
              hamiltonian.hamiltonian.value(state);
  return res;
}

PhasePath integrate_flow(const HamiltonianSystem& hamiltonian, const PhasePoint& x0, double t,
                         int steps) {
  const int n = static_cast<int>(x0.q.size());
  PhasePath path;
  path.states.push_back(x0);
  path.times.push_back(0.0);
  if (t == 0.0) return path;
  if (t < 0.0) throw InvalidParameterError("integrate_flow: t must be nonnegative");
  if (steps < 1) throw InvalidParameterError("integrate_flow: steps must be positive");

  auto rhs = [&hamiltonian, n](const Vector& z) -> Vector {
    const Vector g = hamiltonian.hamiltonian.gradient(z);
    Vector dz(2 * n);
    dz.head(n) = g.tail(n);
    dz.tail(n) = -g.head(n);
    return dz;
  };

  Vector z(2 * n);
  z << x0.q, x0.p;
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    try {
      const Vector k1 = rhs(z);
      const Vector k2 = rhs(z + 0.5 * h * k1);
      const Vector k3 = rhs(z + 0.5 * h * k2);
      const Vector k4 = rhs(z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const NonFiniteEvaluationError&) {
      z.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    if (!z.allFinite()) {
      throw BlowUpError("integrate_flow: state left the finite range at t = " +
                            std::to_string((s + 1) * h),
                        s * h);
    }
    path.states.push_back(PhasePoint{z.head(n), z.tail(n)});
    path.times.push_back((s + 1) * h);
  }
  return path;
}

}  // namespace commact
