#ifndef COMMACT_SYSTEMS_HPP
#define COMMACT_SYSTEMS_HPP

#include "commact/numerics.hpp"
#include "commact/types.hpp"

#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace commact {

/** A continuous-time system defined by a Lagrange function L(q, qdot) on
 *  R^{2n} (arguments stacked as [q; qdot]).
 *
 *  Builtins carry an exact Hamiltonian alongside; generic systems leave it
 *  empty and rely on the local inversion in legendre.hpp.
 *  max_segment_time bounds the duration of any single boundary-value solve;
 *  past a conjugate point the minimizer stops being unique, so systems that
 *  know their first conjugate time refuse to get near it. */
struct LagrangianSystem {
  ConfigSpace space;
  ScalarField lagrangian;
  std::optional<ScalarField> exact_hamiltonian;
  double max_segment_time = std::numeric_limits<double>::infinity();
  std::string name;
};

/// A Hamiltonian H(q, p) on R^{2n} (arguments stacked as [q; p]).
struct HamiltonianSystem {
  ConfigSpace space;
  ScalarField hamiltonian;
  std::string name;
};

/** A discrete-time system defined by a two-point generating function
 *  Lambda(q0, q1) on R^{2n} (arguments stacked as [q0; q1]).  On periodic
 *  coordinates the difference q1 - q0 is reduced to (-pi, pi] inside the
 *  evaluation. */
struct DiscreteLagrangian {
  ConfigSpace space;
  ScalarField generating;
  std::string name;
};

enum class SystemKind { builtin, polynomial };

/// Declarative description of a system, as read from a spec document.
struct SystemSpec {
  SystemKind kind = SystemKind::builtin;
  std::string name;
  std::map<std::string, double> params;
  int dimension = 1;
  std::vector<bool> periodic;
};

using AnySystem = std::variant<LagrangianSystem, DiscreteLagrangian>;

/** Resolves a spec to a fully wired system.
 *
 *  Builtin names: free_particle(mass), harmonic(mass, omega),
 *  quartic_kinetic(), discrete_quadratic(h), discrete_kicked(h, K).
 *  Polynomial kind: name "lagrangian" (monomials in (q, qdot)) or
 *  "discrete" (monomials in (q0, q1)); the params table maps keys
 *  "c_<e1>_..._<e2n>" to coefficients.
 *
 *  Throws UnknownSystemError or InvalidParameterError. */
AnySystem catalog_lookup(const SystemSpec& spec);

/** Parses and validates a JSON spec document.  Recognized fields:
 *  kind, name, params, dimension, periodic; anything else is rejected.
 *  Throws SpecParseError with position/field information. */
SystemSpec parse_system_spec(const std::string& text);

/// parse_system_spec applied to a file's contents.
SystemSpec load_system_spec(const std::string& path);

/// One row of the builtin catalog, for listings.
struct CatalogEntry {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, double>> params;  // name, default
};
std::vector<CatalogEntry> catalog_entries();

// Direct constructors for the builtin catalog.
LagrangianSystem make_free_particle(int dimension, double mass,
                                    std::vector<bool> periodic = {});
LagrangianSystem make_harmonic(int dimension, double mass, double omega,
                               std::vector<bool> periodic = {});
LagrangianSystem make_quartic_kinetic(int dimension, std::vector<bool> periodic = {});
DiscreteLagrangian make_discrete_quadratic(int dimension, double h,
                                           std::vector<bool> periodic = {});
DiscreteLagrangian make_discrete_kicked(int dimension, double h, double kick,
                                        std::vector<bool> periodic = {});

/// coeff * prod_i x_i^exponents[i]; exponents has one entry per argument.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> exponents;
};

ScalarField make_polynomial_field(int dimension, std::vector<Monomial> monomials);
LagrangianSystem make_polynomial_lagrangian(int dimension, std::vector<Monomial> monomials,
                                            std::vector<bool> periodic = {});
DiscreteLagrangian make_polynomial_discrete(int dimension, std::vector<Monomial> monomials,
                                            std::vector<bool> periodic = {});

}  // namespace commact

#endif  // COMMACT_SYSTEMS_HPP
