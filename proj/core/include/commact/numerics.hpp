#ifndef COMMACT_NUMERICS_HPP
#define COMMACT_NUMERICS_HPP

#include "commact/types.hpp"

#include <functional>

namespace commact {

/// Default relative step for central-difference gradients: eps^(1/3).
double fd_gradient_step();
/// Default relative step for central-difference Hessians: eps^(1/4).
double fd_hessian_step();

/** A twice-differentiable scalar function on R^m.
 *
 *  Evaluation is mandatory; gradient and Hessian may be supplied exactly or
 *  fall back to central finite differences.  Instances are immutable after
 *  construction and safe to share across threads. */
class ScalarField {
 public:
  using EvalFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<Matrix(const Vector&)>;

  ScalarField(int dimension, EvalFn eval);
  ScalarField(int dimension, EvalFn eval, GradFn gradient);
  ScalarField(int dimension, EvalFn eval, GradFn gradient, HessFn hessian);

  int dimension() const { return dim_; }
  double value(const Vector& x) const { return eval_(x); }
  double operator()(const Vector& x) const { return eval_(x); }

  /// Exact gradient when supplied, central differences of value() otherwise.
  Vector gradient(const Vector& x) const;
  /// Exact Hessian when supplied; otherwise differenced from the gradient.
  /// Always symmetrized.
  Matrix hessian(const Vector& x) const;

  bool has_exact_gradient() const { return static_cast<bool>(grad_); }
  bool has_exact_hessian() const { return static_cast<bool>(hess_); }

 private:
  int dim_;
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
};

/** Central-difference gradient of f at x.  Component i uses the step
 *  step*max(1,|x_i|).  Throws NonFiniteEvaluationError naming the offending
 *  component if an evaluation is not finite. */
Vector fd_gradient(const ScalarField& f, const Vector& x, double step);
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double step);

/// Central second differences of f, symmetrized.
Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x,
                  double step);

/// A vector-valued map R^m -> R^m with an (exact or differenced) Jacobian.
class VectorField {
 public:
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacFn = std::function<Matrix(const Vector&)>;

  VectorField(int dimension, EvalFn eval);
  VectorField(int dimension, EvalFn eval, JacFn jacobian);

  int dimension() const { return dim_; }
  Vector value(const Vector& x) const { return eval_(x); }
  Matrix jacobian(const Vector& x) const;

 private:
  int dim_;
  EvalFn eval_;
  JacFn jac_;
};

struct NewtonOptions {
  double tol = 1e-10;          // convergence threshold on ||F||_inf
  int max_iter = 100;
  double cond_limit = 1e12;    // Jacobian condition estimate above this is singular
};

struct NewtonResult {
  Vector root;
  SolveDiagnostics diag;
};

/** Damped Newton iteration for F(x) = 0.
 *
 *  Converged means ||F(root)||_inf <= tol.  When the iteration budget runs
 *  out the best iterate seen is returned with diag.converged = false.
 *  Throws SingularJacobianError when the Jacobian condition estimate
 *  exceeds cond_limit. */
NewtonResult newton_solve(const VectorField& f, Vector x0, const NewtonOptions& opts = {});

struct MinimizeOptions {
  double tol = 1e-10;  // convergence threshold on ||grad||_inf
  int max_iter = 100;
};

struct MinimizeResult {
  Vector argmin;
  double value = 0.0;
  SolveDiagnostics diag;
};

/** Local smooth minimization: Newton direction with negative eigenvalues of
 *  the Hessian shifted up, plus a backtracking line search.
 *
 *  Converges to a stationary point with ||grad||_inf <= tol.
 *  diag.hessian_positive_definite reports whether the Hessian at the final
 *  point is positive definite; stationary points that are not strict minima
 *  are returned with the flag false rather than rejected. */
MinimizeResult minimize(const ScalarField& f, Vector x0, const MinimizeOptions& opts = {});

}  // namespace commact

#endif  // COMMACT_NUMERICS_HPP
