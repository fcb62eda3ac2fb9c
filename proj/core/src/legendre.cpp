#include "commact/legendre.hpp"

#include <cmath>

namespace commact {

namespace {

Vector stack(const Vector& a, const Vector& b) {
  Vector x(a.size() + b.size());
  x << a, b;
  return x;
}

}  // namespace

Vector momentum_of_velocity(const LagrangianSystem& system, const Vector& q, const Vector& qdot) {
  const int n = system.space.dimension;
  const Vector g = system.lagrangian.gradient(stack(q, qdot));
  const Vector p = g.tail(n);
  if (!p.allFinite()) {
    throw NonFiniteEvaluationError("momentum_of_velocity: non-finite derivative of L at the probe");
  }
  return p;
}

Vector velocity_of_momentum(const LagrangianSystem& system, const Vector& q, const Vector& p,
                            const Vector& qdot_guess, const NewtonOptions& opts) {
  const int n = system.space.dimension;
  VectorField residual(
      n,
      [&system, &q, &p, n](const Vector& v) -> Vector {
        return system.lagrangian.gradient(stack(q, v)).tail(n) - p;
      },
      [&system, &q, n](const Vector& v) -> Matrix {
        return system.lagrangian.hessian(stack(q, v)).bottomRightCorner(n, n);
      });
  NewtonResult result = newton_solve(residual, qdot_guess, opts);
  if (!result.diag.converged) {
    throw NotConvergedError("velocity_of_momentum: Newton did not reach tolerance " +
                            std::to_string(opts.tol));
  }
  return result.root;
}

Vector velocity_of_momentum(const LagrangianSystem& system, const Vector& q, const Vector& p) {
  return velocity_of_momentum(system, q, p, Vector::Zero(system.space.dimension));
}

HamiltonianSystem hamiltonian_of(const LagrangianSystem& system) {
  if (system.exact_hamiltonian) {
    return HamiltonianSystem{system.space, *system.exact_hamiltonian, system.name};
  }
  return hamiltonian_of_implicit(system);
}

HamiltonianSystem hamiltonian_of_implicit(const LagrangianSystem& system,
                                          const NewtonOptions& opts) {
  const int n = system.space.dimension;
  // Captured by value: the returned field must not dangle.
  const LagrangianSystem sys = system;

  // The momentum itself is the best generic starting branch for the inner
  // inversion (exact for unit-mass kinetic terms).
  auto invert = [sys, n, opts](const Vector& x) -> Vector {
    const Vector q = x.head(n);
    const Vector p = x.tail(n);
    return velocity_of_momentum(sys, q, p, p, opts);
  };

  auto eval = [sys, invert, n](const Vector& x) -> double {
    const Vector qdot = invert(x);
    Vector z(2 * n);
    z << x.head(n), qdot;
    return x.tail(n).dot(qdot) - sys.lagrangian.value(z);
  };
  // Stationarity of the transform in qdot kills all chain-rule terms:
  // dH/dq = -dL/dq evaluated at the inverted velocity, dH/dp = qdot.
  auto grad = [sys, invert, n](const Vector& x) -> Vector {
    const Vector qdot = invert(x);
    Vector z(2 * n);
    z << x.head(n), qdot;
    Vector g(2 * n);
    g.head(n) = -sys.lagrangian.gradient(z).head(n);
    g.tail(n) = qdot;
    return g;
  };
  ScalarField field(2 * n, eval, grad);  // Hessian differenced from the gradient
  return HamiltonianSystem{system.space, std::move(field), system.name};
}

NondegeneracyResult check_nondegeneracy(const LagrangianSystem& system, const Vector& q,
                                        const Vector& qdot) {
  const int n = system.space.dimension;
  const Matrix block = system.lagrangian.hessian(stack(q, qdot)).bottomRightCorner(n, n);
  NondegeneracyResult result;
  if (!block.allFinite()) {
    result.det = std::numeric_limits<double>::quiet_NaN();
    result.ok = false;
    return result;
  }
  result.det = block.determinant();
  result.ok = std::isfinite(result.det) && std::abs(result.det) > 1e-10;
  return result;
}

}  // namespace commact
