#ifndef COMMACT_LEGENDRE_HPP
#define COMMACT_LEGENDRE_HPP

#include "commact/systems.hpp"

namespace commact {

/// p_j = dL/dqdot_j at (q, qdot).
Vector momentum_of_velocity(const LagrangianSystem& system, const Vector& q, const Vector& qdot);

/** Local inverse of the velocity-momentum map: solves
 *  momentum_of_velocity(q, qdot) = p by Newton starting from qdot_guess
 *  (zero by default; the inverse is only local, so multi-branch systems
 *  need a guess on the right branch).
 *  Throws SingularJacobianError or NotConvergedError. */
Vector velocity_of_momentum(const LagrangianSystem& system, const Vector& q, const Vector& p,
                            const Vector& qdot_guess, const NewtonOptions& opts = {});
Vector velocity_of_momentum(const LagrangianSystem& system, const Vector& q, const Vector& p);

/** Hamiltonian of a Lagrangian system: H(q,p) = <p, qdot(q,p)> - L(q, qdot(q,p)).
 *
 *  Returns the system's exact Hamiltonian when it carries one, otherwise the
 *  implicit construction below. */
HamiltonianSystem hamiltonian_of(const LagrangianSystem& system);

/** The implicit construction regardless of any registered exact form: every
 *  evaluation inverts the velocity-momentum map, and gradients come from the
 *  stationarity of the transform (dH/dq = -dL/dq, dH/dp = qdot). */
HamiltonianSystem hamiltonian_of_implicit(const LagrangianSystem& system,
                                          const NewtonOptions& opts = {});

struct NondegeneracyResult {
  double det = 0.0;
  bool ok = false;
};

/// Determinant of the velocity Hessian block d2L/dqdot dqdot at (q, qdot);
/// ok iff it is finite and |det| > 1e-10.
NondegeneracyResult check_nondegeneracy(const LagrangianSystem& system, const Vector& q,
                                        const Vector& qdot);

}  // namespace commact

#endif  // COMMACT_LEGENDRE_HPP
