#ifndef COMMACT_TRAJECTORIES_HPP
#define COMMACT_TRAJECTORIES_HPP

#include "commact/legendre.hpp"
#include "commact/systems.hpp"

namespace commact {

/** A time-discretized path.  Row k of points is q_k; the step is uniform
 *  within each piece of the underlying problem.  switch_indices lists the
 *  interior nodes where the active Lagrangian changes (empty for a
 *  single-system path). */
struct DiscretePath {
  Matrix points;  // (N+1) x n
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<int> switch_indices;

  int segments() const { return static_cast<int>(points.rows()) - 1; }
};

/// Critical action value with boundary momenta and solver bookkeeping.
struct ActionResult {
  double value = 0.0;
  DiscretePath path;
  Vector p_start;
  Vector p_end;
  SolveDiagnostics diag;
  int resolution = 0;           // total number of path segments
  double error_estimate = 0.0;  // step-refinement estimate; 0 for a single solve
};

/// Thrown when step doubling hits the resolution cap before reaching the
/// requested accuracy; carries the best extrapolated result.
struct ResolutionCapError : Error {
  ActionResult best;
  ResolutionCapError(const std::string& msg, ActionResult b) : Error(msg), best(std::move(b)) {}
};

/// A phase-space trajectory sampled at increasing times.
struct PhasePath {
  std::vector<PhasePoint> states;
  std::vector<double> times;

  const PhasePoint& back() const { return states.back(); }
};

/** A fixed-endpoint variational problem, possibly glued from several
 *  Lagrangians active one after the other. */
struct PathSpec {
  struct Piece {
    LagrangianSystem system;
    double duration = 0.0;
    int steps = 0;
  };
  std::vector<Piece> pieces;
  Vector q_start;
  Vector q_end;

  int total_steps() const {
    int s = 0;
    for (const Piece& p : pieces) s += p.steps;
    return s;
  }
};

struct PathSolveOptions {
  double tol = 1e-10;  // on the infinity norm of the discrete action gradient
  int max_iter = 50;
};

/** Newton minimization of the midpoint-rule discrete action of spec over all
 *  interior points, starting from straight-line interpolation in time.
 *  diag.hessian_positive_definite reports whether the interior Hessian at the
 *  solution is positive definite; critical points that are not minima are
 *  returned flagged, not rejected. */
ActionResult solve_path_action(const PathSpec& spec, const PathSolveOptions& opts = {});

/** Doubles every piece's step count until the two-resolution extrapolation
 *  error estimate drops below target_tol (or step_cap total steps is hit, in
 *  which case ResolutionCapError carries the best result).  The returned
 *  value and boundary momenta are extrapolated; the path is the finest one
 *  computed. */
ActionResult refine_path_action(PathSpec spec, double target_tol, int step_cap = 16384,
                                const PathSolveOptions& opts = {});

/// Single-system fixed-endpoint solve at resolution N (N >= 2).
ActionResult minimize_action(const LagrangianSystem& system, const Vector& q_start,
                             const Vector& q_end, double t, int steps,
                             const PathSolveOptions& opts = {});

/// minimize_action under step doubling; see refine_path_action.
ActionResult principal_action(const LagrangianSystem& system, const Vector& q_start,
                              const Vector& q_end, double t, double target_tol,
                              int start_steps = 50, int step_cap = 16384,
                              const PathSolveOptions& opts = {});

/// Infinity norm of the discrete Euler-Lagrange expression over the interior
/// points of a single-system path.
double euler_lagrange_residual(const LagrangianSystem& system, const DiscretePath& path);

/// Discrete one-sided momenta of the segment from a to b under step h:
/// `entering` at a, `leaving` at b.  Both are O(h^2) approximations of the
/// continuous conjugate momentum at the respective endpoint.
struct SegmentMomenta {
  Vector entering;
  Vector leaving;
};
SegmentMomenta segment_momenta(const LagrangianSystem& system, const Vector& a, const Vector& b,
                               double h);

/** Residuals of the action-differential identities at (q_start, q_end, t):
 *    res_q_start = dS/dq_start + p_start,
 *    res_q_end   = dS/dq_end   - p_end,
 *    res_t       = dS/dt       + H(q_end, p_end).
 *  Partials are central differences of the extrapolated action, evaluated at
 *  the resolution pair the base solve settled on. */
struct HJResiduals {
  Vector res_q_start;
  Vector res_q_end;
  double res_t = 0.0;
};
HJResiduals hj_check(const LagrangianSystem& system, const HamiltonianSystem& hamiltonian,
                     const Vector& q_start, const Vector& q_end, double t,
                     double fd_step = 1e-4, double target_tol = 1e-9);

/** Classical fourth-order one-step integration of the canonical equations of
 *  hamiltonian over [0, t] with the given number of steps.  Throws
 *  BlowUpError (carrying the last finite time) if the state leaves the
 *  finite range. */
PhasePath integrate_flow(const HamiltonianSystem& hamiltonian, const PhasePoint& x0, double t,
                         int steps);

}  // namespace commact

#endif  // COMMACT_TRAJECTORIES_HPP
