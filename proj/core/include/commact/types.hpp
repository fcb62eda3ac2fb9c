#ifndef COMMACT_TYPES_HPP
#define COMMACT_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace commact {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of phase space T*M in canonical coordinates.
struct PhasePoint {
  Vector q;
  Vector p;
};

/** Flat configuration space: R^n, or a flat torus on the coordinates
 *  flagged periodic (period 2*pi). */
struct ConfigSpace {
  int dimension = 1;
  std::vector<bool> periodic;  // empty means no coordinate is periodic

  static constexpr double period = 2.0 * M_PI;

  bool any_periodic() const {
    for (bool b : periodic)
      if (b) return true;
    return false;
  }

  /// Reduces each periodic component of a coordinate difference to (-pi, pi].
  Vector wrap_difference(Vector d) const {
    if (periodic.empty()) return d;
    for (int i = 0; i < d.size() && i < static_cast<int>(periodic.size()); ++i) {
      if (!periodic[static_cast<std::size_t>(i)]) continue;
      double x = std::remainder(d[i], period);
      if (x <= -M_PI) x += period;  // remainder returns [-pi, pi]; use (-pi, pi]
      d[i] = x;
    }
    return d;
  }
};

/// Outcome bookkeeping shared by every iterative solve.
struct SolveDiagnostics {
  int iterations = 0;
  double final_residual_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::optional<bool> hessian_positive_definite;
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownSystemError : Error {
  using Error::Error;
};
struct InvalidParameterError : Error {
  using Error::Error;
};
struct SpecParseError : Error {
  using Error::Error;
};
struct SingularJacobianError : Error {
  using Error::Error;
};
struct NotConvergedError : Error {
  using Error::Error;
};
struct NonFiniteEvaluationError : Error {
  using Error::Error;
};
struct InvalidGridError : Error {
  using Error::Error;
};
struct TimeHorizonError : Error {
  using Error::Error;
};

/// Trajectory left the finite range of double; carries the last good time.
struct BlowUpError : Error {
  double last_finite_time;
  BlowUpError(const std::string& msg, double t) : Error(msg), last_finite_time(t) {}
};

}  // namespace commact

#endif  // COMMACT_TYPES_HPP
