#include "commact/systems.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace commact {

namespace {

using nlohmann::json;

// quartic_kinetic velocity Hessian degenerates at qdot = 0; the catalog keeps
// a guard band around it and evaluates to NaN inside.
constexpr double kQuarticVelocityGuard = 1e-3;
constexpr double kQuarticMomentumGuard = 0.1;  // = guard^(1/3)

// Fraction of the first conjugate time the harmonic builtin will accept as a
// single boundary-value segment.
constexpr double kConjugateTimeSafety = 0.9;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_space(int dimension, const std::vector<bool>& periodic) {
  if (dimension < 1) throw InvalidParameterError("dimension must be >= 1");
  if (!periodic.empty() && static_cast<int>(periodic.size()) != dimension) {
    throw InvalidParameterError("periodic array must have one entry per coordinate");
  }
}

double get_param(const SystemSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

void reject_unknown_params(const SystemSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InvalidParameterError("system '" + spec.name + "': unknown parameter '" + key + "'");
    }
  }
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<Monomial> monomials_from_params(const SystemSpec& spec, int n_args) {
  std::vector<Monomial> monomials;
  for (const auto& [key, value] : spec.params) {
    if (key.rfind("c_", 0) != 0) {
      throw InvalidParameterError("polynomial coefficient key '" + key +
                                  "' must look like c_<e1>_..._<e" + std::to_string(n_args) + ">");
    }
    Monomial m;
    m.coeff = value;
    std::stringstream ss(key.substr(2));
    std::string part;
    while (std::getline(ss, part, '_')) {
      try {
        std::size_t used = 0;
        const int e = std::stoi(part, &used);
        if (used != part.size() || e < 0) throw std::invalid_argument(part);
        m.exponents.push_back(e);
      } catch (const std::exception&) {
        throw InvalidParameterError("polynomial coefficient key '" + key +
                                    "': bad exponent '" + part + "'");
      }
    }
    if (static_cast<int>(m.exponents.size()) != n_args) {
      throw InvalidParameterError("polynomial coefficient key '" + key + "' needs " +
                                  std::to_string(n_args) + " exponents");
    }
    monomials.push_back(std::move(m));
  }
  if (monomials.empty()) throw InvalidParameterError("polynomial system has no coefficients");
  return monomials;
}

}  // namespace

LagrangianSystem make_free_particle(int dimension, double mass, std::vector<bool> periodic) {
  check_space(dimension, periodic);
  if (!(mass > 0.0)) throw InvalidParameterError("free_particle: mass must be positive");
  const int n = dimension;
  ScalarField lagrangian(
      2 * n, [n, mass](const Vector& x) { return 0.5 * mass * x.tail(n).squaredNorm(); },
      [n, mass](const Vector& x) {
        Vector g = Vector::Zero(2 * n);
        g.tail(n) = mass * x.tail(n);
        return g;
      },
      [n, mass](const Vector&) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        h.bottomRightCorner(n, n) = mass * Matrix::Identity(n, n);
        return h;
      });
  ScalarField hamiltonian(
      2 * n, [n, mass](const Vector& x) { return x.tail(n).squaredNorm() / (2.0 * mass); },
      [n, mass](const Vector& x) {
        Vector g = Vector::Zero(2 * n);
        g.tail(n) = x.tail(n) / mass;
        return g;
      },
      [n, mass](const Vector&) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        h.bottomRightCorner(n, n) = Matrix::Identity(n, n) / mass;
        return h;
      });
  return LagrangianSystem{ConfigSpace{dimension, std::move(periodic)}, std::move(lagrangian),
                          std::move(hamiltonian), std::numeric_limits<double>::infinity(),
                          "free_particle"};
}

LagrangianSystem make_harmonic(int dimension, double mass, double omega,
                               std::vector<bool> periodic) {
  check_space(dimension, periodic);
  if (!(mass > 0.0)) throw InvalidParameterError("harmonic: mass must be positive");
  if (!(omega > 0.0)) throw InvalidParameterError("harmonic: omega must be positive");
  const int n = dimension;
  const double k = mass * omega * omega;
  ScalarField lagrangian(
      2 * n,
      [n, mass, k](const Vector& x) {
        return 0.5 * mass * x.tail(n).squaredNorm() - 0.5 * k * x.head(n).squaredNorm();
      },
      [n, mass, k](const Vector& x) {
        Vector g(2 * n);
        g.head(n) = -k * x.head(n);
        g.tail(n) = mass * x.tail(n);
        return g;
      },
      [n, mass, k](const Vector&) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        h.topLeftCorner(n, n) = -k * Matrix::Identity(n, n);
        h.bottomRightCorner(n, n) = mass * Matrix::Identity(n, n);
        return h;
      });
  ScalarField hamiltonian(
      2 * n,
      [n, mass, k](const Vector& x) {
        return x.tail(n).squaredNorm() / (2.0 * mass) + 0.5 * k * x.head(n).squaredNorm();
      },
      [n, mass, k](const Vector& x) {
        Vector g(2 * n);
        g.head(n) = k * x.head(n);
        g.tail(n) = x.tail(n) / mass;
        return g;
      },
      [n, mass, k](const Vector&) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        h.topLeftCorner(n, n) = k * Matrix::Identity(n, n);
        h.bottomRightCorner(n, n) = Matrix::Identity(n, n) / mass;
        return h;
      });
  return LagrangianSystem{ConfigSpace{dimension, std::move(periodic)}, std::move(lagrangian),
                          std::move(hamiltonian), kConjugateTimeSafety * M_PI / omega,
                          "harmonic"};
}

LagrangianSystem make_quartic_kinetic(int dimension, std::vector<bool> periodic) {
  check_space(dimension, periodic);
  const int n = dimension;
  auto guarded = [n](const Vector& x) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(x[n + i]) < kQuarticVelocityGuard) return false;
    }
    return true;
  };
  ScalarField lagrangian(
      2 * n,
      [n, guarded](const Vector& x) {
        if (!guarded(x)) return kNan;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::pow(std::abs(x[n + i]), 4.0 / 3.0);
        return 0.75 * s;
      },
      [n, guarded](const Vector& x) {
        Vector g = Vector::Zero(2 * n);
        if (!guarded(x)) {
          g.setConstant(kNan);
          return g;
        }
        for (int i = 0; i < n; ++i) {
          const double v = x[n + i];
          g[n + i] = std::copysign(std::pow(std::abs(v), 1.0 / 3.0), v);
        }
        return g;
      },
      [n, guarded](const Vector& x) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        if (!guarded(x)) {
          h.setConstant(kNan);
          return h;
        }
        for (int i = 0; i < n; ++i) {
          h(n + i, n + i) = std::pow(std::abs(x[n + i]), -2.0 / 3.0) / 3.0;
        }
        return h;
      });
  auto p_guarded = [n](const Vector& x) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(x[n + i]) < kQuarticMomentumGuard) return false;
    }
    return true;
  };
  ScalarField hamiltonian(
      2 * n,
      [n, p_guarded](const Vector& x) {
        if (!p_guarded(x)) return kNan;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::pow(x[n + i], 4);
        return 0.25 * s;
      },
      [n, p_guarded](const Vector& x) {
        Vector g = Vector::Zero(2 * n);
        if (!p_guarded(x)) {
          g.setConstant(kNan);
          return g;
        }
        for (int i = 0; i < n; ++i) g[n + i] = std::pow(x[n + i], 3);
        return g;
      },
      [n, p_guarded](const Vector& x) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        if (!p_guarded(x)) {
          h.setConstant(kNan);
          return h;
        }
        for (int i = 0; i < n; ++i) h(n + i, n + i) = 3.0 * x[n + i] * x[n + i];
        return h;
      });
  return LagrangianSystem{ConfigSpace{dimension, std::move(periodic)}, std::move(lagrangian),
                          std::move(hamiltonian), std::numeric_limits<double>::infinity(),
                          "quartic_kinetic"};
}

DiscreteLagrangian make_discrete_quadratic(int dimension, double h, std::vector<bool> periodic) {
  check_space(dimension, periodic);
  if (!(h > 0.0)) throw InvalidParameterError("discrete_quadratic: h must be positive");
  const int n = dimension;
  ConfigSpace space{dimension, std::move(periodic)};
  ScalarField generating(
      2 * n,
      [n, h, space](const Vector& x) {
        const Vector d = space.wrap_difference(x.tail(n) - x.head(n));
        return d.squaredNorm() / (2.0 * h);
      },
      [n, h, space](const Vector& x) {
        const Vector d = space.wrap_difference(x.tail(n) - x.head(n));
        Vector g(2 * n);
        g.head(n) = -d / h;
        g.tail(n) = d / h;
        return g;
      },
      [n, h](const Vector&) {
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        m.topLeftCorner(n, n) = Matrix::Identity(n, n) / h;
        m.bottomRightCorner(n, n) = Matrix::Identity(n, n) / h;
        m.topRightCorner(n, n) = -Matrix::Identity(n, n) / h;
        m.bottomLeftCorner(n, n) = -Matrix::Identity(n, n) / h;
        return m;
      });
  return DiscreteLagrangian{space, std::move(generating), "discrete_quadratic"};
}

DiscreteLagrangian make_discrete_kicked(int dimension, double h, double kick,
                                        std::vector<bool> periodic) {
  check_space(dimension, periodic);
  if (!(h > 0.0)) throw InvalidParameterError("discrete_kicked: h must be positive");
  const int n = dimension;
  ConfigSpace space{dimension, std::move(periodic)};
  ScalarField generating(
      2 * n,
      [n, h, kick, space](const Vector& x) {
        const Vector d = space.wrap_difference(x.tail(n) - x.head(n));
        double v = d.squaredNorm() / (2.0 * h);
        for (int i = 0; i < n; ++i) v += kick * std::cos(x[n + i]);
        return v;
      },
      [n, h, kick, space](const Vector& x) {
        const Vector d = space.wrap_difference(x.tail(n) - x.head(n));
        Vector g(2 * n);
        g.head(n) = -d / h;
        g.tail(n) = d / h;
        for (int i = 0; i < n; ++i) g[n + i] -= kick * std::sin(x[n + i]);
        return g;
      },
      [n, h, kick](const Vector& x) {
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        m.topLeftCorner(n, n) = Matrix::Identity(n, n) / h;
        m.bottomRightCorner(n, n) = Matrix::Identity(n, n) / h;
        m.topRightCorner(n, n) = -Matrix::Identity(n, n) / h;
        m.bottomLeftCorner(n, n) = -Matrix::Identity(n, n) / h;
        for (int i = 0; i < n; ++i) m(n + i, n + i) -= kick * std::cos(x[n + i]);
        return m;
      });
  return DiscreteLagrangian{space, std::move(generating), "discrete_kicked"};
}

ScalarField make_polynomial_field(int dimension, std::vector<Monomial> monomials) {
  for (const Monomial& m : monomials) {
    if (static_cast<int>(m.exponents.size()) != dimension) {
      throw InvalidParameterError("polynomial monomial has wrong exponent count");
    }
  }
  auto power = [](double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
  };
  auto eval = [monomials, power](const Vector& x) {
    double s = 0.0;
    for (const Monomial& m : monomials) {
      double t = m.coeff;
      for (int i = 0; i < x.size(); ++i) t *= power(x[i], m.exponents[i]);
      s += t;
    }
    return s;
  };
  auto grad = [monomials, power](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (const Monomial& m : monomials) {
      for (int j = 0; j < x.size(); ++j) {
        const int ej = m.exponents[j];
        if (ej == 0) continue;
        double t = m.coeff * ej * power(x[j], ej - 1);
        for (int i = 0; i < x.size(); ++i) {
          if (i != j) t *= power(x[i], m.exponents[i]);
        }
        g[j] += t;
      }
    }
    return g;
  };
  auto hess = [monomials, power](const Vector& x) {
    const int d = static_cast<int>(x.size());
    Matrix h = Matrix::Zero(d, d);
    for (const Monomial& m : monomials) {
      for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k) {
          const int ej = m.exponents[j];
          const int ek = m.exponents[k];
          double t;
          if (j == k) {
            if (ej < 2) continue;
            t = m.coeff * ej * (ej - 1) * power(x[j], ej - 2);
          } else {
            if (ej == 0 || ek == 0) continue;
            t = m.coeff * ej * ek * power(x[j], ej - 1) * power(x[k], ek - 1);
          }
          for (int i = 0; i < d; ++i) {
            if (i != j && i != k) t *= power(x[i], m.exponents[i]);
          }
          h(j, k) += t;
          if (j != k) h(k, j) += t;
        }
      }
    }
    return h;
  };
  return ScalarField(dimension, eval, grad, hess);
}

LagrangianSystem make_polynomial_lagrangian(int dimension, std::vector<Monomial> monomials,
                                            std::vector<bool> periodic) {
  check_space(dimension, periodic);
  return LagrangianSystem{ConfigSpace{dimension, std::move(periodic)},
                          make_polynomial_field(2 * dimension, std::move(monomials)),
                          std::nullopt, std::numeric_limits<double>::infinity(), "polynomial"};
}

DiscreteLagrangian make_polynomial_discrete(int dimension, std::vector<Monomial> monomials,
                                            std::vector<bool> periodic) {
  check_space(dimension, periodic);
  return DiscreteLagrangian{ConfigSpace{dimension, std::move(periodic)},
                            make_polynomial_field(2 * dimension, std::move(monomials)),
                            "polynomial_discrete"};
}

AnySystem catalog_lookup(const SystemSpec& spec) {
  check_space(spec.dimension, spec.periodic);
  if (spec.kind == SystemKind::polynomial) {
    if (spec.name == "lagrangian") {
      return make_polynomial_lagrangian(spec.dimension,
                                        monomials_from_params(spec, 2 * spec.dimension),
                                        spec.periodic);
    }
    if (spec.name == "discrete") {
      return make_polynomial_discrete(spec.dimension,
                                      monomials_from_params(spec, 2 * spec.dimension),
                                      spec.periodic);
    }
    throw UnknownSystemError("polynomial kind must be named 'lagrangian' or 'discrete', got '" +
                             spec.name + "'");
  }

  if (spec.name == "free_particle") {
    reject_unknown_params(spec, {"mass"});
    return make_free_particle(spec.dimension, get_param(spec, "mass", 1.0), spec.periodic);
  }
  if (spec.name == "harmonic") {
    reject_unknown_params(spec, {"mass", "omega"});
    return make_harmonic(spec.dimension, get_param(spec, "mass", 1.0),
                         get_param(spec, "omega", 1.0), spec.periodic);
  }
  if (spec.name == "quartic_kinetic") {
    reject_unknown_params(spec, {});
    return make_quartic_kinetic(spec.dimension, spec.periodic);
  }
  if (spec.name == "discrete_quadratic") {
    reject_unknown_params(spec, {"h"});
    return make_discrete_quadratic(spec.dimension, get_param(spec, "h", 1.0), spec.periodic);
  }
  if (spec.name == "discrete_kicked") {
    reject_unknown_params(spec, {"h", "K"});
    return make_discrete_kicked(spec.dimension, get_param(spec, "h", 1.0),
                                get_param(spec, "K", 1.0), spec.periodic);
  }
  throw UnknownSystemError("unknown builtin system '" + spec.name + "'");
}

SystemSpec parse_system_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw SpecParseError("system spec: parse error at line " + std::to_string(line) +
                         ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw SpecParseError("system spec: document must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    if (key != "kind" && key != "name" && key != "params" && key != "dimension" &&
        key != "periodic") {
      throw SpecParseError("system spec: unknown field '" + key + "'");
    }
  }

  SystemSpec spec;
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw SpecParseError("system spec: missing or non-string field 'name'");
  }
  spec.name = doc["name"].get<std::string>();

  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw SpecParseError("system spec: field 'kind' must be a string");
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "builtin") {
      spec.kind = SystemKind::builtin;
    } else if (kind == "polynomial") {
      spec.kind = SystemKind::polynomial;
    } else {
      throw SpecParseError("system spec: field 'kind' must be 'builtin' or 'polynomial', got '" +
                           kind + "'");
    }
  }

  if (doc.contains("dimension")) {
    if (!doc["dimension"].is_number_integer() || doc["dimension"].get<int>() < 1) {
      throw SpecParseError("system spec: field 'dimension' must be a positive integer");
    }
    spec.dimension = doc["dimension"].get<int>();
  }

  if (doc.contains("params")) {
    if (!doc["params"].is_object()) {
      throw SpecParseError("system spec: field 'params' must be an object of numbers");
    }
    for (const auto& [key, value] : doc["params"].items()) {
      if (!value.is_number()) {
        throw SpecParseError("system spec: parameter '" + key + "' must be a number");
      }
      spec.params[key] = value.get<double>();
    }
  }

  if (doc.contains("periodic")) {
    if (!doc["periodic"].is_array()) {
      throw SpecParseError("system spec: field 'periodic' must be an array of booleans");
    }
    for (const auto& value : doc["periodic"]) {
      if (!value.is_boolean()) {
        throw SpecParseError("system spec: field 'periodic' must contain only booleans");
      }
      spec.periodic.push_back(value.get<bool>());
    }
    if (static_cast<int>(spec.periodic.size()) != spec.dimension) {
      throw SpecParseError("system spec: 'periodic' must have one entry per coordinate");
    }
  }

  return spec;
}

SystemSpec load_system_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError("system spec: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_system_spec(buffer.str());
}

std::vector<CatalogEntry> catalog_entries() {
  return {
      {"free_particle", "L = m|qdot|^2/2", {{"mass", 1.0}}},
      {"harmonic", "L = m|qdot|^2/2 - m omega^2 |q|^2/2", {{"mass", 1.0}, {"omega", 1.0}}},
      {"quartic_kinetic", "L = (3/4) sum |qdot_i|^(4/3), |qdot_i| >= 1e-3", {}},
      {"discrete_quadratic", "Lambda = |q1-q0|^2/(2h)", {{"h", 1.0}}},
      {"discrete_kicked", "Lambda = |q1-q0|^2/(2h) + K sum cos(q1_i)", {{"h", 1.0}, {"K", 1.0}}},
  };
}

}  // namespace commact
