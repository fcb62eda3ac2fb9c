#ifndef COMMACT_COMPOSITION_HPP
#define COMMACT_COMPOSITION_HPP

#include "commact/report.hpp"
#include "commact/trajectories.hpp"

namespace commact {

/// Which system acts first on the glued time interval.
enum class ComposeOrder { one_two, two_one };

/** Critical glued action through an intermediate junction.
 *
 *  The glued path is minimized jointly over all interior points, junction
 *  included, so the momentum continuity at the junction is an emergent
 *  property measured by junction_jump rather than an imposed constraint. */
struct ComposedActionResult {
  double value = 0.0;
  Vector junction;        // path point at the switch time
  ActionResult glued;     // finest glued solve
  Vector p_start;
  Vector p_end;
  Vector junction_jump;   // one-sided discrete momentum difference at the switch
  ComposeOrder order = ComposeOrder::one_two;
  double error_estimate = 0.0;
  int resolution = 0;
};

struct ComposeOptions {
  double target_tol = 1e-8;
  int start_steps = 50;      // total steps split across the two segments
  int step_cap = 16384;
  PathSolveOptions solve;
};

/** S12 (order one_two): system1 acts on [0, t1], system2 on [t1, t1+t2].
 *  S21 (order two_one): system2 acts on [0, t2], system1 on [t2, t1+t2].
 *  t1 always belongs to system1 and t2 to system2.  Endpoints are q0 and q12.
 *  Step counts are split proportionally to the durations so the switch time
 *  is always a grid node. */
ComposedActionResult composed_action(const LagrangianSystem& system1,
                                     const LagrangianSystem& system2, const Vector& q0,
                                     const Vector& q12, double t1, double t2, ComposeOrder order,
                                     const ComposeOptions& opts = {});

/** Same glued problem with the junction held fixed at q_junction instead of
 *  solved for: two independent boundary-value solves.  The returned
 *  junction_jump measures how far q_junction is from criticality. */
ComposedActionResult composed_action_fixed_junction(const LagrangianSystem& system1,
                                                    const LagrangianSystem& system2,
                                                    const Vector& q0, const Vector& q_junction,
                                                    const Vector& q12, double t1, double t2,
                                                    ComposeOrder order,
                                                    const ComposeOptions& opts = {});

/// Convenience accessor mirroring the result field.
Vector junction_momentum_jump(const ComposedActionResult& result);

struct CommutatorEstimate {
  double delta = 0.0;           // S12 - S21
  double error_estimate = 0.0;  // sum of the two refinement estimates
  ComposedActionResult s12;
  ComposedActionResult s21;
};

/// S12(q0,q12,t1,t2) - S21(q0,q12,t2,t1).
CommutatorEstimate action_commutator(const LagrangianSystem& system1,
                                     const LagrangianSystem& system2, const Vector& q0,
                                     const Vector& q12, double t1, double t2,
                                     const ComposeOptions& opts = {});

/** Central-difference partials of the composed action compared against the
 *  boundary momenta and energies of the critical glued path:
 *    r_q0  = dS12/dq0  + p_start,
 *    r_q12 = dS12/dq12 - p_end,
 *    r_t1  = dS12/dt1  + H1(q0, p_start),
 *    r_t2  = dS12/dt2  + H2(q12, p_end). */
struct ComposedDerivativeResiduals {
  Vector r_q0;
  Vector r_q12;
  double r_t1 = 0.0;
  double r_t2 = 0.0;
};
ComposedDerivativeResiduals composed_action_derivatives(const LagrangianSystem& system1,
                                                        const LagrangianSystem& system2,
                                                        const Vector& q0, const Vector& q12,
                                                        double t1, double t2,
                                                        double fd_step = 1e-4,
                                                        const ComposeOptions& opts = {});

/// Differences of the boundary momenta between the two orders.
struct EndpointMismatch {
  Vector d_p0;
  Vector d_p12;
};
EndpointMismatch endpoint_momentum_mismatch(const LagrangianSystem& system1,
                                            const LagrangianSystem& system2, const Vector& q0,
                                            const Vector& q12, double t1, double t2,
                                            const ComposeOptions& opts = {});

/** Energy transport between the glued endpoints:
 *    r_h1 = H1(q0, p_start of order 12) - H1(q12, p_end of order 21),
 *    r_h2 = H2(q0, p_start of order 21) - H2(q12, p_end of order 12).
 *  Both vanish when the composed actions of the pair coincide. */
struct EnergyTransportResiduals {
  double r_h1 = 0.0;
  double r_h2 = 0.0;
};
EnergyTransportResiduals energy_transport_check(const LagrangianSystem& system1,
                                                const LagrangianSystem& system2, const Vector& q0,
                                                const Vector& q12, double t1, double t2,
                                                const ComposeOptions& opts = {});

/// Canonical bracket sum_j (dH1/dp_j dH2/dq_j - dH1/dq_j dH2/dp_j) at x.
double poisson_bracket(const HamiltonianSystem& h1, const HamiltonianSystem& h2,
                       const PhasePoint& x);

struct FlowCommutatorResult {
  double norm = 0.0;  // infinity norm over the stacked (q, p) difference
  PhasePoint endpoint_12;
  PhasePoint endpoint_21;
};

/// Compares F2^{t2}(F1^{t1}(x0)) with F1^{t1}(F2^{t2}(x0)).
FlowCommutatorResult flow_commutator(const HamiltonianSystem& h1, const HamiltonianSystem& h2,
                                     const PhasePoint& x0, double t1, double t2, int steps = 200);

struct ContinuousReportOptions {
  int grid = 5;
  double qrange = 0.5;
  std::vector<std::pair<double, double>> times = {{0.5, 0.5}, {1.0, 1.0}};
  double tol = 1e-8;
  double commuting_factor = 10.0;
  double noncommuting_factor = 100.0;
  int flow_steps = 200;
  ComposeOptions compose;
};

/** Runs the full set of checks over a (q0, q12) grid crossed with the time
 *  pairs, plus poisson/flow samples both at the phase points induced by the
 *  composed solutions and on a fixed deterministic probe grid of grid^2
 *  points.  Per-point failures are recorded, not fatal. */
CommutativityReport commutativity_report(const LagrangianSystem& system1,
                                         const LagrangianSystem& system2,
                                         const ContinuousReportOptions& opts = {});

}  // namespace commact

#endif  // COMMACT_COMPOSITION_HPP
