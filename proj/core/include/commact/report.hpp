#ifndef COMMACT_REPORT_HPP
#define COMMACT_REPORT_HPP

#include "commact/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace commact {

enum class Verdict { commuting, non_commuting, inconclusive };

const char* to_string(Verdict v);

/// One (q0, q12[, t1, t2]) evaluation of the commutativity checks.
struct ReportPoint {
  Vector q0;
  Vector q12;
  double t1 = 0.0;  // unused in discrete mode
  double t2 = 0.0;

  bool ok = true;
  std::string error;  // failure description when !ok

  double s12 = 0.0;
  double s21 = 0.0;
  double action_commutator = 0.0;
  double error_estimate = 0.0;

  // Continuous mode.
  Vector d_p0;                       // start-momentum mismatch between orders
  Vector d_p12;                      // end-momentum mismatch between orders
  double r_h1 = 0.0;                 // energy transport residuals
  double r_h2 = 0.0;
  double junction_jump_12 = 0.0;     // infinity norms of the junction momentum jumps
  double junction_jump_21 = 0.0;
  double poisson_bracket = 0.0;      // at the induced phase point (q0, p_start of order 12)
  double flow_commutator = 0.0;

  // Discrete mode.
  Vector corner_e0;   // residuals of the two derived corner equations
  Vector corner_e12;
};

/// One sample of a fixed phase-space probe grid.
struct PhaseProbe {
  Vector q;
  Vector p;
  bool ok = true;
  std::string error;
  double poisson_bracket = 0.0;   // continuous mode
  double flow_commutator = 0.0;   // continuous: flow endpoints; discrete: composed maps
};

struct ReportSummary {
  double max_action_commutator = 0.0;
  double max_poisson_bracket = 0.0;
  double max_flow_commutator = 0.0;
  double max_error_estimate = 0.0;
  double max_endpoint_mismatch = 0.0;
  double max_energy_residual = 0.0;
  double max_junction_jump = 0.0;
  double max_corner_residual = 0.0;
};

/** Full outcome of a commutativity run: per-point records in deterministic
 *  grid order, probe records, maxima, and the verdict.
 *
 *  Verdict rule: non-commuting as soon as one point's |commutator| exceeds
 *  noncommuting_factor times its own error estimate; otherwise commuting when
 *  the largest |commutator| stays within commuting_factor times the largest
 *  error estimate; otherwise (or when more than 10% of the points failed)
 *  inconclusive. */
struct CommutativityReport {
  std::string mode;  // "continuous" | "discrete"
  std::string system1;
  std::string system2;
  int grid = 0;
  double qrange = 0.0;
  std::vector<std::pair<double, double>> times;  // continuous mode only
  double tol = 0.0;
  double commuting_factor = 10.0;
  double noncommuting_factor = 100.0;

  std::vector<ReportPoint> points;
  std::vector<PhaseProbe> phase_probes;
  ReportSummary summary;
  Verdict verdict = Verdict::inconclusive;
  int failed_points = 0;

  /// Extra config echo emitted verbatim into the report document; each value
  /// must already be a valid JSON fragment.
  std::vector<std::pair<std::string, std::string>> config_echo;
};

/// Applies the verdict rule and fills summary maxima; called by the report
/// builders after the point lists are complete.
void finalize_report(CommutativityReport& report);

/** Serialization.  Field order is fixed and numbers are printed with 17
 *  significant digits, so identical reports are byte-identical. */
std::string report_to_json(const CommutativityReport& report);
std::string report_to_text(const CommutativityReport& report);

/// %.17g rendering used across all report output.
std::string format_number(double v);

}  // namespace commact

#endif  // COMMACT_REPORT_HPP
