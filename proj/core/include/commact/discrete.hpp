#ifndef COMMACT_DISCRETE_HPP
#define COMMACT_DISCRETE_HPP

#include "commact/composition.hpp"
#include "commact/report.hpp"
#include "commact/systems.hpp"

namespace commact {

/** One application of the implicit map generated by a two-point function:
 *  q_next solves p0 = dLambda/dq0(q0, q_next), then
 *  p_next = -dLambda/dq1(q0, q_next).
 *
 *  Note the sign pairing: +dLambda/dq0 for the incoming momentum and
 *  -dLambda/dq1 for the outgoing one, which makes the quadratic generating
 *  function |q1-q0|^2/(2h) produce the shear (q, p) -> (q - h p, p). */
struct DiscreteMapResult {
  Vector q_next;
  Vector p_next;
  SolveDiagnostics diag;
};

DiscreteMapResult discrete_map(const DiscreteLagrangian& system, const Vector& q0,
                               const Vector& p0, const Vector& q_guess,
                               const NewtonOptions& opts = {});
/// Newton guess defaults to q0 (near-identity branch).
DiscreteMapResult discrete_map(const DiscreteLagrangian& system, const Vector& q0,
                               const Vector& p0);

/** Critical inner vertex of the elementary two-step square, both orders.
 *
 *  q_mid solves dfirst/dq(q0, q) + dsecond/dq(q, q12) = 0 (the corner
 *  equation of the given order); q_mid_swapped solves the order-swapped one.
 *  The two derived corner residuals res_e0/res_e12 compare the outer
 *  derivatives of the two composite paths and vanish exactly for commuting
 *  generating functions. */
struct CornerSolution {
  Vector q_mid;
  Vector q_mid_swapped;
  Vector res_e1;
  Vector res_e2;
  Vector res_e0;
  Vector res_e12;
  double s12 = 0.0;
  double s21 = 0.0;
  SolveDiagnostics diag_first;
  SolveDiagnostics diag_second;
};

CornerSolution solve_corner(const DiscreteLagrangian& first, const DiscreteLagrangian& second,
                            const Vector& q0, const Vector& q12, const Vector& q_guess,
                            const NewtonOptions& opts = {});
/// Guess defaults to the midpoint (q0 + q12)/2.
CornerSolution solve_corner(const DiscreteLagrangian& first, const DiscreteLagrangian& second,
                            const Vector& q0, const Vector& q12);

/// Composite two-step action at the critical inner vertex of the given order.
struct DiscreteComposedAction {
  double value = 0.0;
  Vector q_mid;
  bool hessian_positive_definite = false;  // minimality is flagged, not enforced
  SolveDiagnostics diag;
};
DiscreteComposedAction discrete_composed_action(const DiscreteLagrangian& system1,
                                                const DiscreteLagrangian& system2,
                                                const Vector& q0, const Vector& q12,
                                                ComposeOrder order,
                                                const NewtonOptions& opts = {});

/// S12(q0,q12) - S21(q0,q12).
double discrete_action_commutator(const DiscreteLagrangian& system1,
                                  const DiscreteLagrangian& system2, const Vector& q0,
                                  const Vector& q12, const NewtonOptions& opts = {});

/// Residuals of the two derived corner equations at the solved vertices.
struct CornerConsistency {
  Vector res_e0;
  Vector res_e12;
};
CornerConsistency corner_consistency_check(const DiscreteLagrangian& system1,
                                           const DiscreteLagrangian& system2, const Vector& q0,
                                           const Vector& q12, const NewtonOptions& opts = {});

/// Compares F2(F1(q0,p0)) with F1(F2(q0,p0)).
struct MapCommutatorResult {
  double norm = 0.0;
  PhasePoint x_12;
  PhasePoint x_21;
};
MapCommutatorResult map_commutator(const DiscreteLagrangian& system1,
                                   const DiscreteLagrangian& system2, const Vector& q0,
                                   const Vector& p0, const NewtonOptions& opts = {});

/** ||DF^T J DF - J||_inf where DF is the central-difference Jacobian of the
 *  map at (q0, p0) and J the canonical symplectic matrix. */
double symplecticity_check(const DiscreteLagrangian& system, const Vector& q0, const Vector& p0,
                           double fd_step = 1e-5, const NewtonOptions& opts = {});

struct DiscreteReportOptions {
  int grid = 5;
  double qrange = 0.5;
  double tol = 1e-10;  // Newton tolerance; doubles as the per-point error scale
  double commuting_factor = 10.0;
  double noncommuting_factor = 100.0;
};

/** Action commutators and corner residuals over a (q0, q12) grid plus map
 *  commutators over a deterministic grid^2 phase probe set.  Error estimates
 *  are exact solve tolerances; no step refinement is involved. */
CommutativityReport discrete_commutativity_report(const DiscreteLagrangian& system1,
                                                  const DiscreteLagrangian& system2,
                                                  const DiscreteReportOptions& opts = {});

}  // namespace commact

#endif  // COMMACT_DISCRETE_HPP
