#include "commact/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <utility>

namespace commact {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Hessian eigenvalues at a reported minimizer must clear this (scaled) bar
// for the positive-definite flag; semidefinite directions stay flagged.
constexpr double kPdThreshold = 1e-5;

double scaled_step(double base, double xi) { return base * std::max(1.0, std::abs(xi)); }

}  // namespace

double fd_gradient_step() { return std::cbrt(kEps); }
double fd_hessian_step() { return std::pow(kEps, 0.25); }

ScalarField::ScalarField(int dimension, EvalFn eval)
    : dim_(dimension), eval_(std::move(eval)) {}
ScalarField::ScalarField(int dimension, EvalFn eval, GradFn gradient)
    : dim_(dimension), eval_(std::move(eval)), grad_(std::move(gradient)) {}
ScalarField::ScalarField(int dimension, EvalFn eval, GradFn gradient, HessFn hessian)
    : dim_(dimension),
      eval_(std::move(eval)),
      grad_(std::move(gradient)),
      hess_(std::move(hessian)) {}

Vector ScalarField::gradient(const Vector& x) const {
  if (grad_) return grad_(x);
  return fd_gradient(eval_, x, fd_gradient_step());
}

Matrix ScalarField::hessian(const Vector& x) const {
  if (hess_) {
    Matrix h = hess_(x);
    return 0.5 * (h + h.transpose());
  }
  if (grad_) {
    // First differences of the exact gradient.
    const int m = dim_;
    Matrix h(m, m);
    const double base = fd_gradient_step();
    for (int i = 0; i < m; ++i) {
      const double step = scaled_step(base, x[i]);
      Vector xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      h.col(i) = (grad_(xp) - grad_(xm)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
  }
  return fd_hessian(eval_, x, fd_hessian_step());
}

Vector fd_gradient(const ScalarField& f, const Vector& x, double step) {
  return fd_gradient([&f](const Vector& y) { return f.value(y); }, x, step);
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double step) {
  const int m = static_cast<int>(x.size());
  Vector g(m);
  for (int i = 0; i < m; ++i) {
    const double h = scaled_step(step, x[i]);
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fp = f(xp);
    const double fm = f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteEvaluationError("fd_gradient: non-finite evaluation while probing component " +
                                     std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x,
                  double step) {
  const int m = static_cast<int>(x.size());
  Matrix h(m, m);
  const double f0 = f(x);
  if (!std::isfinite(f0)) throw NonFiniteEvaluationError("fd_hessian: non-finite base evaluation");
  for (int i = 0; i < m; ++i) {
    const double hi = scaled_step(step, x[i]);
    {
      Vector xp = x, xm = x;
      xp[i] += hi;
      xm[i] -= hi;
      const double fp = f(xp), fm = f(xm);
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NonFiniteEvaluationError("fd_hessian: non-finite evaluation while probing component " +
                                       std::to_string(i));
      }
      h(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    }
    for (int j = i + 1; j < m; ++j) {
      const double hj = scaled_step(step, x[j]);
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += hi;
      xpp[j] += hj;
      xpm[i] += hi;
      xpm[j] -= hj;
      xmp[i] -= hi;
      xmp[j] += hj;
      xmm[i] -= hi;
      xmm[j] -= hj;
      const double v = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * hi * hj);
      if (!std::isfinite(v)) {
        throw NonFiniteEvaluationError("fd_hessian: non-finite evaluation while probing components " +
                                       std::to_string(i) + "," + std::to_string(j));
      }
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

VectorField::VectorField(int dimension, EvalFn eval)
    : dim_(dimension), eval_(std::move(eval)) {}
VectorField::VectorField(int dimension, EvalFn eval, JacFn jacobian)
    : dim_(dimension), eval_(std::move(eval)), jac_(std::move(jacobian)) {}

Matrix VectorField::jacobian(const Vector& x) const {
  if (jac_) return jac_(x);
  const int m = dim_;
  Matrix j(m, m);
  const double base = fd_gradient_step();
  for (int i = 0; i < m; ++i) {
    const double step = scaled_step(base, x[i]);
    Vector xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    j.col(i) = (eval_(xp) - eval_(xm)) / (2.0 * step);
  }
  return j;
}

NewtonResult newton_solve(const VectorField& f, Vector x0, const NewtonOptions& opts) {
  NewtonResult result;
  Vector x = std::move(x0);
  Vector fx = f.value(x);
  if (!fx.allFinite()) throw NonFiniteEvaluationError("newton_solve: non-finite residual at start");

  Vector best_x = x;
  double best_norm = fx.lpNorm<Eigen::Infinity>();

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const double norm = fx.lpNorm<Eigen::Infinity>();
    if (norm < best_norm) {
      best_norm = norm;
      best_x = x;
    }
    if (norm <= opts.tol) {
      result.root = x;
      result.diag.iterations = iter;
      result.diag.final_residual_norm = norm;
      result.diag.converged = true;
      return result;
    }
    if (iter == opts.max_iter) break;

    const Matrix jac = f.jacobian(x);
    Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0) || smax / smin > opts.cond_limit) {
      throw SingularJacobianError("newton_solve: Jacobian condition estimate above " +
                                  std::to_string(opts.cond_limit));
    }
    const Vector dx = svd.solve(-fx);

    // Backtrack until the residual shrinks; keep the best trial otherwise.
    double lambda = 1.0;
    Vector x_try;
    Vector f_try;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_try = x + lambda * dx;
      f_try = f.value(x_try);
      if (f_try.allFinite() && f_try.lpNorm<Eigen::Infinity>() < norm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;  // stalled
    x = std::move(x_try);
    fx = std::move(f_try);
  }

  result.root = best_x;
  result.diag.iterations = opts.max_iter;
  result.diag.final_residual_norm = best_norm;
  result.diag.converged = false;
  return result;
}

MinimizeResult minimize(const ScalarField& f, Vector x0, const MinimizeOptions& opts) {
  MinimizeResult result;
  Vector x = std::move(x0);
  double fx = f.value(x);
  if (!std::isfinite(fx)) throw NonFiniteEvaluationError("minimize: non-finite value at start");
  Vector g = f.gradient(x);

  int iter = 0;
  bool converged = false;
  for (; iter <= opts.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.tol) {
      converged = true;
      break;
    }
    if (iter == opts.max_iter) break;

    const Matrix h = f.hessian(x);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Vector evals = es.eigenvalues();
    const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
    const double floor = 1e-8 * scale;
    Vector inv = evals;
    for (int i = 0; i < inv.size(); ++i) inv[i] = 1.0 / std::max(evals[i], floor);
    const Vector direction =
        -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * g);

    const double slope = g.dot(direction);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Vector x_try = x + step * direction;
      const double f_try = f.value(x_try);
      if (std::isfinite(f_try) && f_try <= fx + 1e-4 * step * slope) {
        x = x_try;
        fx = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no admissible step; report best point found
    g = f.gradient(x);
  }

  result.argmin = x;
  result.value = fx;
  result.diag.iterations = iter;
  result.diag.final_residual_norm = g.lpNorm<Eigen::Infinity>();
  result.diag.converged = converged;

  Eigen::SelfAdjointEigenSolver<Matrix> es(f.hessian(x));
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  result.diag.hessian_positive_definite = lmin > kPdThreshold * std::max(1.0, lmax);
  return result;
}

}  // namespace commact
