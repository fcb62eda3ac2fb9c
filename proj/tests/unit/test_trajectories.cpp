#include "commact/trajectories.hpp"

#include <doctest.h>

#include <cmath>

using namespace commact;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

// Closed forms used as oracles throughout this file.
double free_action(double mass, double qa, double qb, double t) {
  return mass * (qb - qa) * (qb - qa) / (2.0 * t);
}

double harmonic_action(double omega, double qa, double qb, double t) {
  return omega * ((qa * qa + qb * qb) * std::cos(omega * t) - 2.0 * qa * qb) /
         (2.0 * std::sin(omega * t));
}

double energy(const HamiltonianSystem& h, const PhasePoint& x) {
  Vector z(x.q.size() + x.p.size());
  z << x.q, x.p;
  return h.hamiltonian.value(z);
}

}  // namespace

TEST_CASE("integrate_flow on the free Hamiltonian is exact") {
  const auto h = hamiltonian_of(make_free_particle(1, 1.0));
  const PhasePath path = integrate_flow(h, PhasePoint{scalar(0.0), scalar(1.0)}, 1.0, 50);
  CHECK(path.back().q[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(path.back().p[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate_flow reproduces the quarter-turn rotation") {
  const auto h = hamiltonian_of(make_harmonic(1, 1.0, 1.0));
  const PhasePath path =
      integrate_flow(h, PhasePoint{scalar(0.0), scalar(1.0)}, M_PI / 2.0, 100);
  CHECK(std::abs(path.back().q[0] - 1.0) <= 1e-8);
  CHECK(std::abs(path.back().p[0]) <= 1e-8);
}

TEST_CASE("integrate_flow at t = 0 returns the start state") {
  const auto h = hamiltonian_of(make_harmonic(1, 1.0, 1.0));
  const PhasePath path = integrate_flow(h, PhasePoint{scalar(0.3), scalar(-0.7)}, 0.0, 100);
  CHECK(path.states.size() == 1);
  CHECK(path.back().q[0] == 0.3);
  CHECK(path.back().p[0] == -0.7);
}

TEST_CASE("integrate_flow reports blow-up with the last finite time") {
  ScalarField field(2, [](const Vector& x) { return 0.5 * x[1] * x[1] - std::pow(x[0], 4); });
  const HamiltonianSystem h{ConfigSpace{1, {}}, field, "runaway"};
  CHECK_THROWS_AS(integrate_flow(h, PhasePoint{scalar(2.0), scalar(2.0)}, 10.0, 100),
                  BlowUpError);
  try {
    integrate_flow(h, PhasePoint{scalar(2.0), scalar(2.0)}, 10.0, 100);
  } catch (const BlowUpError& e) {
    CHECK(e.last_finite_time >= 0.0);
    CHECK(e.last_finite_time < 10.0);
  }
}

TEST_CASE("energy is conserved to integrator accuracy") {
  const auto h = hamiltonian_of(make_harmonic(1, 1.0, 1.0));
  const PhasePoint x0{scalar(0.0), scalar(1.0)};
  const PhasePath path = integrate_flow(h, x0, 10.0, 1000);
  const double e0 = energy(h, x0);
  double drift = 0.0;
  for (const PhasePoint& state : path.states) {
    drift = std::max(drift, std::abs(energy(h, state) - e0));
  }
  CHECK(drift <= 1e-10);
}

TEST_CASE("minimize_action free particle straight line") {
  const auto system = make_free_particle(1, 1.0);
  const ActionResult r = minimize_action(system, scalar(0.0), scalar(1.0), 1.0, 100);
  CHECK(r.diag.converged);
  CHECK(r.diag.hessian_positive_definite.value());
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.p_start[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.p_end[0] == doctest::Approx(1.0).epsilon(1e-10));
  // the interior is exactly the straight line
  for (int k = 0; k <= 100; ++k) {
    CHECK(std::abs(r.path.points(k, 0) - k / 100.0) <= 1e-10);
  }
}

TEST_CASE("minimize_action keeps the oscillator at rest") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const ActionResult r = minimize_action(system, scalar(0.0), scalar(0.0), 1.0, 50);
  CHECK(r.diag.converged);
  CHECK(std::abs(r.value) <= 1e-12);
  CHECK(r.path.points.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("minimize_action oscillator quarter period") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const ActionResult r = minimize_action(system, scalar(0.0), scalar(1.0), M_PI / 2.0, 200);
  CHECK(r.diag.converged);
  CHECK(std::abs(r.value - 0.0) <= 2e-4);  // closed form vanishes at the quarter period
}

TEST_CASE("discrete action converges at second order") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const double exact = harmonic_action(1.0, 0.0, 1.0, 1.0);
  double previous_error = 0.0;
  for (int n : {50, 100, 200, 400}) {
    const ActionResult r = minimize_action(system, scalar(0.0), scalar(1.0), 1.0, n);
    const double error = std::abs(r.value - exact);
    if (previous_error > 0.0) {
      const double ratio = previous_error / error;
      CHECK(ratio >= 3.5);
      CHECK(ratio <= 4.5);
    }
    previous_error = error;
  }
}

TEST_CASE("principal_action free particle is exact at any resolution") {
  const auto system = make_free_particle(1, 1.0);
  const ActionResult r = principal_action(system, scalar(0.0), scalar(1.0), 1.0, 1e-10);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.error_estimate <= 1e-10);

  const auto heavy = make_free_particle(1, 2.0);
  const ActionResult rh = principal_action(heavy, scalar(0.0), scalar(1.0), 1.0, 1e-10);
  CHECK(rh.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("principal_action reaches the oscillator closed form") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const double exact = harmonic_action(1.0, 0.0, 1.0, 1.0);

  const ActionResult tight = principal_action(system, scalar(0.0), scalar(1.0), 1.0, 1e-8);
  CHECK(std::abs(tight.value - exact) <= 1e-8);
  CHECK(tight.error_estimate <= 1e-8);

  // the 1e-6 target is already met by a modest refinement level
  const ActionResult modest = principal_action(system, scalar(0.0), scalar(1.0), 1.0, 1e-6);
  CHECK(std::abs(modest.value - exact) <= 1e-6);
  CHECK(modest.resolution <= 800);
}

TEST_CASE("principal_action surfaces the resolution cap") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  CHECK_THROWS_AS(principal_action(system, scalar(0.0), scalar(1.0), 1.0, 1e-16, 50, 256),
                  ResolutionCapError);
  try {
    principal_action(system, scalar(0.0), scalar(1.0), 1.0, 1e-16, 50, 256);
  } catch (const ResolutionCapError& e) {
    CHECK(std::abs(e.best.value - harmonic_action(1.0, 0.0, 1.0, 1.0)) <= 1e-5);
  }
}

TEST_CASE("boundary momenta converge at second order to the exact momentum") {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const double exact_p0 = 1.0 / std::sin(1.0);  // q(t) = sin(t)/sin(1)
  const double e1 =
      std::abs(minimize_action(system, scalar(0.0), scalar(1.0), 1.0, 100).p_start[0] - exact_p0);
  const double e2 =
      std::abs(minimize_action(system, scalar(0.0), scalar(1.0), 1.0, 200).p_start[0] - exact_p0);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);

  // consistency with the fiber derivative at the first segment midpoint
  const ActionResult r = minimize_action(system, scalar(0.0), scalar(1.0), 1.0, 200);
  const double h = 1.0 / 200.0;
  const Vector mid = 0.5 * (r.path.points.row(0) + r.path.points.row(1));
  const Vector vel = (r.path.points.row(1) - r.path.points.row(0)) / h;
  const Vector p_mid = momentum_of_velocity(system, mid, vel);
  CHECK(std::abs(r.p_start[0] - p_mid[0]) <= 2.0 * h);
}

TEST_CASE("euler_lagrange_residual distinguishes solutions from perturbations") {
  const auto system = make_free_particle(1, 1.0);
  const int n = 20;
  DiscretePath straight;
  straight.points.resize(n + 1, 1);
  for (int k = 0; k <= n; ++k) straight.points(k, 0) = k / static_cast<double>(n);
  straight.t_start = 0.0;
  straight.t_end = 1.0;
  CHECK(euler_lagrange_residual(system, straight) <= 1e-12);

  DiscretePath bent = straight;
  bent.points(n / 2, 0) += 0.1;
  CHECK(euler_lagrange_residual(system, bent) > 1e-2);

  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  const ActionResult r = minimize_action(harmonic, scalar(0.0), scalar(1.0), 1.0, 100);
  CHECK(euler_lagrange_residual(harmonic, r.path) <= 1e-10);
}

TEST_CASE("hj_check residuals vanish for free and harmonic systems") {
  const auto free1 = make_free_particle(1, 1.0);
  const auto h_free = hamiltonian_of(free1);
  const HJResiduals free_res = hj_check(free1, h_free, scalar(0.0), scalar(1.0), 1.0);
  CHECK(std::abs(free_res.res_q_start[0]) <= 1e-6);
  CHECK(std::abs(free_res.res_q_end[0]) <= 1e-6);
  CHECK(std::abs(free_res.res_t) <= 1e-6);

  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  const auto h_harm = hamiltonian_of(harmonic);
  const HJResiduals rest = hj_check(harmonic, h_harm, scalar(0.0), scalar(0.0), 1.0);
  CHECK(std::abs(rest.res_q_start[0]) <= 1e-8);
  CHECK(std::abs(rest.res_q_end[0]) <= 1e-8);
  CHECK(std::abs(rest.res_t) <= 1e-8);

  const HJResiduals swing = hj_check(harmonic, h_harm, scalar(0.0), scalar(1.0), 1.0);
  CHECK(std::abs(swing.res_q_start[0]) <= 1e-5);
  CHECK(std::abs(swing.res_q_end[0]) <= 1e-5);
  CHECK(std::abs(swing.res_t) <= 1e-5);
}

TEST_CASE("hj_check free-particle components match hand values") {
  // S = (qb - qa)^2 / (2t): dS/dt = -1/2 and H(qb, p_end) = 1/2 cancel.
  const auto free1 = make_free_particle(1, 1.0);
  const ActionResult base = principal_action(free1, scalar(0.0), scalar(1.0), 1.0, 1e-10);
  CHECK(base.p_start[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(free_action(1.0, 0.0, 1.0, 1.0) == doctest::Approx(base.value).epsilon(1e-12));
}

TEST_CASE("time horizon guard refuses conjugate-point territory") {
  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  CHECK_THROWS_AS(minimize_action(harmonic, scalar(0.0), scalar(1.0), 2.9, 100),
                  TimeHorizonError);
  CHECK_THROWS_AS(principal_action(harmonic, scalar(0.0), scalar(1.0), 3.2, 1e-8),
                  TimeHorizonError);
}

TEST_CASE("minimize_action validates its inputs") {
  const auto system = make_free_particle(1, 1.0);
  CHECK_THROWS_AS(minimize_action(system, scalar(0.0), scalar(1.0), -1.0, 100),
                  InvalidParameterError);
  CHECK_THROWS_AS(minimize_action(system, scalar(0.0), scalar(1.0), 1.0, 1),
                  InvalidParameterError);
}
