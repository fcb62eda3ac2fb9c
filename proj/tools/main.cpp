#include "commact/composition.hpp"
#include "commact/discrete.hpp"
#include "commact/report.hpp"
#include "commact/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace commact;

constexpr int kExitOk = 0;
constexpr int kExitNonCommuting = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;
constexpr int kExitSolver = 4;

Vector parse_csv(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw SpecParseError(flag + ": cannot parse '" + part + "' as a real number");
    }
  }
  if (values.empty()) throw SpecParseError(flag + ": empty vector");
  Vector x(static_cast<int>(values.size()));
  for (int i = 0; i < x.size(); ++i) x[i] = values[static_cast<std::size_t>(i)];
  return x;
}

std::vector<std::pair<double, double>> parse_times(const std::string& text) {
  std::vector<std::pair<double, double>> times;
  std::stringstream ss(text);
  std::string pair_text;
  while (std::getline(ss, pair_text, ',')) {
    const auto colon = pair_text.find(':');
    if (colon == std::string::npos) {
      throw SpecParseError("--times: expected t1:t2 pairs, got '" + pair_text + "'");
    }
    try {
      times.emplace_back(std::stod(pair_text.substr(0, colon)),
                         std::stod(pair_text.substr(colon + 1)));
    } catch (const std::exception&) {
      throw SpecParseError("--times: cannot parse '" + pair_text + "'");
    }
  }
  if (times.empty()) throw SpecParseError("--times: empty list");
  return times;
}

LagrangianSystem load_lagrangian(const std::string& path) {
  const AnySystem system = catalog_lookup(load_system_spec(path));
  if (const auto* lagrangian = std::get_if<LagrangianSystem>(&system)) return *lagrangian;
  throw SpecParseError(path + ": expected a continuous Lagrangian system");
}

DiscreteLagrangian load_discrete(const std::string& path) {
  const AnySystem system = catalog_lookup(load_system_spec(path));
  if (const auto* discrete = std::get_if<DiscreteLagrangian>(&system)) return *discrete;
  throw SpecParseError(path + ": expected a discrete Lagrangian system");
}

std::string vector_json(const Vector& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_number(v[i]);
  }
  out += "]";
  return out;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string spec_json(const SystemSpec& spec) {
  std::string out = "{\"kind\": ";
  out += spec.kind == SystemKind::builtin ? "\"builtin\"" : "\"polynomial\"";
  out += ", \"name\": " + quoted(spec.name);
  out += ", \"params\": {";
  bool first = true;
  for (const auto& [key, value] : spec.params) {
    if (!first) out += ", ";
    first = false;
    out += quoted(key) + ": " + format_number(value);
  }
  out += "}, \"dimension\": " + std::to_string(spec.dimension);
  if (!spec.periodic.empty()) {
    out += ", \"periodic\": [";
    for (std::size_t i = 0; i < spec.periodic.size(); ++i) {
      if (i > 0) out += ", ";
      out += spec.periodic[i] ? "true" : "false";
    }
    out += "]";
  }
  out += "}";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing output file '" + path + "'");
}

// Small deterministic JSON document for the single-shot subcommands.
class DocBuilder {
 public:
  void add(const std::string& key, const std::string& raw_fragment) {
    entries_.emplace_back(key, raw_fragment);
  }
  void add_number(const std::string& key, double v) { add(key, format_number(v)); }
  void add_string(const std::string& key, const std::string& s) { add(key, quoted(s)); }
  std::string str() const {
    std::string out = "{\n";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      out += "  " + quoted(entries_[i].first) + ": " + entries_[i].second;
      out += i + 1 < entries_.size() ? ",\n" : "\n";
    }
    out += "}\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct CommonOutput {
  std::string out_path;
  std::string format = "json";
};

void emit(const CommonOutput& common, const DocBuilder& doc, const std::string& text_form) {
  if (!common.out_path.empty()) {
    write_file(common.out_path, common.format == "json" ? doc.str() : text_form);
  }
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::commuting: return kExitOk;
    case Verdict::non_commuting: return kExitNonCommuting;
    case Verdict::inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int run_catalog(const CommonOutput& common) {
  DocBuilder doc;
  std::string text;
  std::string entries = "[";
  bool first = true;
  for (const CatalogEntry& entry : catalog_entries()) {
    text += entry.name + "  --  " + entry.summary + "\n";
    std::string params = "{";
    bool first_param = true;
    for (const auto& [name, fallback] : entry.params) {
      text += "    " + name + " (default " + format_number(fallback) + ")\n";
      if (!first_param) params += ", ";
      first_param = false;
      params += quoted(name) + ": " + format_number(fallback);
    }
    params += "}";
    if (!first) entries += ", ";
    first = false;
    entries += "{\"name\": " + quoted(entry.name) + ", \"summary\": " + quoted(entry.summary) +
               ", \"params\": " + params + "}";
  }
  entries += "]";
  doc.add("catalog", entries);
  doc.add_string("tool_version", kToolVersion);
  std::cout << text;
  emit(common, doc, text);
  return kExitOk;
}

struct ActionArgs {
  std::string system_path;
  std::string from, to;
  double time = 1.0;
  double tol = 1e-8;
  int resolution = 50;
  CommonOutput common;
};

int run_action(const ActionArgs& args) {
  const SystemSpec spec = load_system_spec(args.system_path);
  const auto system = load_lagrangian(args.system_path);
  const Vector qa = parse_csv(args.from, "--from");
  const Vector qb = parse_csv(args.to, "--to");
  const ActionResult result =
      principal_action(system, qa, qb, args.time, args.tol, args.resolution);
  if (!result.diag.converged) throw NotConvergedError("action solve did not converge");

  std::printf("S = %s  (error estimate %s, resolution %d)\n", format_number(result.value).c_str(),
              format_number(result.error_estimate).c_str(), result.resolution);

  DocBuilder doc;
  doc.add("system", spec_json(spec));
  doc.add("q_start", vector_json(qa));
  doc.add("q_end", vector_json(qb));
  doc.add_number("time", args.time);
  doc.add_number("value", result.value);
  doc.add("p_start", vector_json(result.p_start));
  doc.add("p_end", vector_json(result.p_end));
  doc.add_number("error_estimate", result.error_estimate);
  doc.add("resolution", std::to_string(result.resolution));
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc,
       "S = " + format_number(result.value) +
           " error_estimate = " + format_number(result.error_estimate) + "\n");
  return kExitOk;
}

struct FlowArgs {
  std::string system_path;
  std::string q, p;
  double time = 1.0;
  int steps = 200;
  CommonOutput common;
};

int run_flow(const FlowArgs& args) {
  const SystemSpec spec = load_system_spec(args.system_path);
  const auto system = load_lagrangian(args.system_path);
  const HamiltonianSystem hamiltonian = hamiltonian_of(system);
  const PhasePoint x0{parse_csv(args.q, "--q"), parse_csv(args.p, "--p")};
  const PhasePath path = integrate_flow(hamiltonian, x0, args.time, args.steps);
  const PhasePoint& end = path.back();

  std::printf("q = %s  p = %s\n", vector_json(end.q).c_str(), vector_json(end.p).c_str());

  DocBuilder doc;
  doc.add("system", spec_json(spec));
  doc.add("q_start", vector_json(x0.q));
  doc.add("p_start", vector_json(x0.p));
  doc.add_number("time", args.time);
  doc.add("steps", std::to_string(args.steps));
  doc.add("q_end", vector_json(end.q));
  doc.add("p_end", vector_json(end.p));
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc, "q = " + vector_json(end.q) + " p = " + vector_json(end.p) + "\n");
  return kExitOk;
}

struct HjArgs {
  std::string system_path;
  std::string from, to;
  double time = 1.0;
  double fd_step = 1e-4;
  double tol = 1e-9;
  CommonOutput common;
};

int run_hj_check(const HjArgs& args) {
  const SystemSpec spec = load_system_spec(args.system_path);
  const auto system = load_lagrangian(args.system_path);
  const HamiltonianSystem hamiltonian = hamiltonian_of(system);
  const Vector qa = parse_csv(args.from, "--from");
  const Vector qb = parse_csv(args.to, "--to");
  const HJResiduals res =
      hj_check(system, hamiltonian, qa, qb, args.time, args.fd_step, args.tol);

  std::printf("res_q_start = %s  res_q_end = %s  res_t = %s\n",
              vector_json(res.res_q_start).c_str(), vector_json(res.res_q_end).c_str(),
              format_number(res.res_t).c_str());

  DocBuilder doc;
  doc.add("system", spec_json(spec));
  doc.add("q_start", vector_json(qa));
  doc.add("q_end", vector_json(qb));
  doc.add_number("time", args.time);
  doc.add_number("fd_step", args.fd_step);
  doc.add("res_q_start", vector_json(res.res_q_start));
  doc.add("res_q_end", vector_json(res.res_q_end));
  doc.add_number("res_t", res.res_t);
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc,
       "res_q_start = " + vector_json(res.res_q_start) + " res_q_end = " +
           vector_json(res.res_q_end) + " res_t = " + format_number(res.res_t) + "\n");
  return kExitOk;
}

struct ComposeArgs {
  std::string l1_path, l2_path;
  std::string q0, q12;
  double t1 = 1.0, t2 = 1.0;
  std::string order = "both";
  double tol = 1e-8;
  int resolution = 50;
  CommonOutput common;
};

int run_compose(const ComposeArgs& args) {
  const SystemSpec spec1 = load_system_spec(args.l1_path);
  const SystemSpec spec2 = load_system_spec(args.l2_path);
  const auto system1 = load_lagrangian(args.l1_path);
  const auto system2 = load_lagrangian(args.l2_path);
  const Vector q0 = parse_csv(args.q0, "--q0");
  const Vector q12 = parse_csv(args.q12, "--q12");

  ComposeOptions opts;
  opts.target_tol = args.tol;
  opts.start_steps = args.resolution;

  DocBuilder doc;
  doc.add("l1", spec_json(spec1));
  doc.add("l2", spec_json(spec2));
  doc.add("q0", vector_json(q0));
  doc.add("q12", vector_json(q12));
  doc.add_number("t1", args.t1);
  doc.add_number("t2", args.t2);

  std::string text;
  auto describe = [&](const char* label, const ComposedActionResult& r) {
    std::printf("%s = %s  junction = %s  jump = %s\n", label, format_number(r.value).c_str(),
                vector_json(r.junction).c_str(), vector_json(r.junction_jump).c_str());
    text += std::string(label) + " = " + format_number(r.value) + "\n";
    const std::string key = label;
    doc.add(key + "_value", format_number(r.value));
    doc.add(key + "_junction", vector_json(r.junction));
    doc.add(key + "_p_start", vector_json(r.p_start));
    doc.add(key + "_p_end", vector_json(r.p_end));
    doc.add(key + "_junction_jump", vector_json(r.junction_jump));
    doc.add(key + "_error_estimate", format_number(r.error_estimate));
  };

  if (args.order == "12" || args.order == "both") {
    describe("s12", composed_action(system1, system2, q0, q12, args.t1, args.t2,
                                    ComposeOrder::one_two, opts));
  }
  if (args.order == "21" || args.order == "both") {
    describe("s21", composed_action(system1, system2, q0, q12, args.t1, args.t2,
                                    ComposeOrder::two_one, opts));
  }
  if (args.order == "both") {
    const CommutatorEstimate est =
        action_commutator(system1, system2, q0, q12, args.t1, args.t2, opts);
    std::printf("commutator = %s  (error estimate %s)\n", format_number(est.delta).c_str(),
                format_number(est.error_estimate).c_str());
    text += "commutator = " + format_number(est.delta) + "\n";
    doc.add_number("action_commutator", est.delta);
    doc.add_number("commutator_error_estimate", est.error_estimate);
  }
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc, text);
  return kExitOk;
}

struct CheckArgs {
  std::string l1_path, l2_path;
  int grid = 5;
  double qrange = 0.5;
  std::string times = "0.5:0.5,1:1";
  double tol = 1e-8;
  int resolution = 50;
  int flow_steps = 200;
  CommonOutput common;
};

int run_check_commute(const CheckArgs& args) {
  const SystemSpec spec1 = load_system_spec(args.l1_path);
  const SystemSpec spec2 = load_system_spec(args.l2_path);
  const auto system1 = load_lagrangian(args.l1_path);
  const auto system2 = load_lagrangian(args.l2_path);

  ContinuousReportOptions opts;
  opts.grid = args.grid;
  opts.qrange = args.qrange;
  opts.times = parse_times(args.times);
  opts.tol = args.tol;
  opts.flow_steps = args.flow_steps;
  opts.compose.start_steps = args.resolution;

  CommutativityReport report = commutativity_report(system1, system2, opts);
  report.config_echo.emplace_back("l1", spec_json(spec1));
  report.config_echo.emplace_back("l2", spec_json(spec2));
  report.config_echo.emplace_back("resolution", std::to_string(args.resolution));
  report.config_echo.emplace_back("flow_steps", std::to_string(args.flow_steps));

  std::printf("verdict: %s  (max |S12-S21| = %s, max error estimate = %s, failed points = %d)\n",
              to_string(report.verdict),
              format_number(report.summary.max_action_commutator).c_str(),
              format_number(report.summary.max_error_estimate).c_str(), report.failed_points);

  if (!args.common.out_path.empty()) {
    write_file(args.common.out_path,
               args.common.format == "json" ? report_to_json(report) : report_to_text(report));
  }
  return verdict_exit(report.verdict);
}

struct DiscreteMapArgs {
  std::string system_path;
  std::string q, p;
  int steps = 1;
  CommonOutput common;
};

int run_discrete_map(const DiscreteMapArgs& args) {
  const SystemSpec spec = load_system_spec(args.system_path);
  const auto system = load_discrete(args.system_path);
  Vector q = parse_csv(args.q, "--q");
  Vector p = parse_csv(args.p, "--p");
  if (args.steps < 1) throw SpecParseError("--steps must be positive");

  std::string orbit = "[";
  orbit += "{\"q\": " + vector_json(q) + ", \"p\": " + vector_json(p) + "}";
  for (int step = 0; step < args.steps; ++step) {
    const DiscreteMapResult r = discrete_map(system, q, p);
    if (!r.diag.converged) {
      throw NotConvergedError("discrete map solve did not converge at step " +
                              std::to_string(step + 1));
    }
    q = r.q_next;
    p = r.p_next;
    orbit += ", {\"q\": " + vector_json(q) + ", \"p\": " + vector_json(p) + "}";
  }
  orbit += "]";

  std::printf("q = %s  p = %s\n", vector_json(q).c_str(), vector_json(p).c_str());

  DocBuilder doc;
  doc.add("system", spec_json(spec));
  doc.add("steps", std::to_string(args.steps));
  doc.add("orbit", orbit);
  doc.add("q_end", vector_json(q));
  doc.add("p_end", vector_json(p));
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc, "q = " + vector_json(q) + " p = " + vector_json(p) + "\n");
  return kExitOk;
}

struct CheckDiscreteArgs {
  std::string l1_path, l2_path;
  int grid = 5;
  double qrange = 0.5;
  double tol = 1e-10;
  CommonOutput common;
};

int run_check_commute_discrete(const CheckDiscreteArgs& args) {
  const SystemSpec spec1 = load_system_spec(args.l1_path);
  const SystemSpec spec2 = load_system_spec(args.l2_path);
  const auto system1 = load_discrete(args.l1_path);
  const auto system2 = load_discrete(args.l2_path);

  DiscreteReportOptions opts;
  opts.grid = args.grid;
  opts.qrange = args.qrange;
  opts.tol = args.tol;

  CommutativityReport report = discrete_commutativity_report(system1, system2, opts);
  report.config_echo.emplace_back("l1", spec_json(spec1));
  report.config_echo.emplace_back("l2", spec_json(spec2));

  std::printf("verdict: %s  (max |S12-S21| = %s, max map commutator = %s, failed points = %d)\n",
              to_string(report.verdict),
              format_number(report.summary.max_action_commutator).c_str(),
              format_number(report.summary.max_flow_commutator).c_str(), report.failed_points);

  if (!args.common.out_path.empty()) {
    write_file(args.common.out_path,
               args.common.format == "json" ? report_to_json(report) : report_to_text(report));
  }
  return verdict_exit(report.verdict);
}

struct PoissonArgs {
  std::string l1_path, l2_path;
  std::string q, p;
  CommonOutput common;
};

int run_poisson(const PoissonArgs& args) {
  const SystemSpec spec1 = load_system_spec(args.l1_path);
  const SystemSpec spec2 = load_system_spec(args.l2_path);
  const HamiltonianSystem h1 = hamiltonian_of(load_lagrangian(args.l1_path));
  const HamiltonianSystem h2 = hamiltonian_of(load_lagrangian(args.l2_path));
  const PhasePoint x{parse_csv(args.q, "--q"), parse_csv(args.p, "--p")};
  const double bracket = poisson_bracket(h1, h2, x);

  std::printf("{H1, H2} = %s\n", format_number(bracket).c_str());

  DocBuilder doc;
  doc.add("l1", spec_json(spec1));
  doc.add("l2", spec_json(spec2));
  doc.add("q", vector_json(x.q));
  doc.add("p", vector_json(x.p));
  doc.add_number("poisson_bracket", bracket);
  doc.add_string("tool_version", kToolVersion);
  emit(args.common, doc, "{H1, H2} = " + format_number(bracket) + "\n");
  return kExitOk;
}

void add_output_flags(CLI::App* sub, CommonOutput& common) {
  sub->add_option("--out", common.out_path, "Write the full report/document to this path");
  sub->add_option("--format", common.format, "Output file format")
      ->check(CLI::IsMember({"json", "text"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for commuting principal actions, Hamiltonian flows,\n"
               "and discrete symplectic maps"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonOutput catalog_common;
  CLI::App* catalog = app.add_subcommand("catalog", "List the builtin systems");
  add_output_flags(catalog, catalog_common);

  ActionArgs action_args;
  CLI::App* action = app.add_subcommand("action", "Principal action between fixed endpoints");
  action->add_option("--system", action_args.system_path, "System spec file")->required();
  action->add_option("--from", action_args.from, "Start point (comma-separated)")->required();
  action->add_option("--to", action_args.to, "End point (comma-separated)")->required();
  action->add_option("--time", action_args.time, "Duration")->required();
  action->add_option("--tol", action_args.tol, "Refinement tolerance");
  action->add_option("--resolution", action_args.resolution, "Starting step count");
  add_output_flags(action, action_args.common);

  FlowArgs flow_args;
  CLI::App* flow = app.add_subcommand("flow", "Integrate the Hamiltonian flow");
  flow->add_option("--system", flow_args.system_path, "System spec file")->required();
  flow->add_option("--q", flow_args.q, "Start configuration")->required();
  flow->add_option("--p", flow_args.p, "Start momentum")->required();
  flow->add_option("--time", flow_args.time, "Duration")->required();
  flow->add_option("--steps", flow_args.steps, "Integration steps");
  add_output_flags(flow, flow_args.common);

  HjArgs hj_args;
  CLI::App* hj = app.add_subcommand("hj-check", "Residuals of the action-differential identities");
  hj->add_option("--system", hj_args.system_path, "System spec file")->required();
  hj->add_option("--from", hj_args.from, "Start point")->required();
  hj->add_option("--to", hj_args.to, "End point")->required();
  hj->add_option("--time", hj_args.time, "Duration")->required();
  hj->add_option("--fd-step", hj_args.fd_step, "Differencing step");
  hj->add_option("--tol", hj_args.tol, "Refinement tolerance for the base solve");
  add_output_flags(hj, hj_args.common);

  ComposeArgs compose_args;
  CLI::App* compose = app.add_subcommand("compose", "Composed action through a free junction");
  compose->add_option("--l1", compose_args.l1_path, "First system spec file")->required();
  compose->add_option("--l2", compose_args.l2_path, "Second system spec file")->required();
  compose->add_option("--q0", compose_args.q0, "Start point")->required();
  compose->add_option("--q12", compose_args.q12, "End point")->required();
  compose->add_option("--t1", compose_args.t1, "Duration of system 1")->required();
  compose->add_option("--t2", compose_args.t2, "Duration of system 2")->required();
  compose->add_option("--order", compose_args.order, "Which order to evaluate")
      ->check(CLI::IsMember({"12", "21", "both"}));
  compose->add_option("--tol", compose_args.tol, "Refinement tolerance");
  compose->add_option("--resolution", compose_args.resolution, "Starting step count");
  add_output_flags(compose, compose_args.common);

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand(
      "check-commute", "Grid test of composed-action commutativity plus Hamiltonian cross-checks");
  check->add_option("--l1", check_args.l1_path, "First system spec file")->required();
  check->add_option("--l2", check_args.l2_path, "Second system spec file")->required();
  check->add_option("--grid", check_args.grid, "Grid points per side");
  check->add_option("--qrange", check_args.qrange, "Half-width of the endpoint grid");
  check->add_option("--times", check_args.times, "Comma-separated t1:t2 pairs");
  check->add_option("--tol", check_args.tol, "Refinement tolerance");
  check->add_option("--resolution", check_args.resolution, "Starting step count");
  check->add_option("--flow-steps", check_args.flow_steps, "Flow integration steps");
  add_output_flags(check, check_args.common);

  DiscreteMapArgs map_args;
  CLI::App* dmap = app.add_subcommand("discrete-map", "Apply the implicit discrete map");
  dmap->add_option("--system", map_args.system_path, "Discrete system spec file")->required();
  dmap->add_option("--q", map_args.q, "Start configuration")->required();
  dmap->add_option("--p", map_args.p, "Start momentum")->required();
  dmap->add_option("--steps", map_args.steps, "Number of map applications");
  add_output_flags(dmap, map_args.common);

  CheckDiscreteArgs check_discrete_args;
  CLI::App* check_discrete = app.add_subcommand(
      "check-commute-discrete", "Grid test of discrete composed actions and map commutators");
  check_discrete->add_option("--l1", check_discrete_args.l1_path, "First spec file")->required();
  check_discrete->add_option("--l2", check_discrete_args.l2_path, "Second spec file")->required();
  check_discrete->add_option("--grid", check_discrete_args.grid, "Grid points per side");
  check_discrete->add_option("--qrange", check_discrete_args.qrange, "Half-width of the grid");
  check_discrete->add_option("--tol", check_discrete_args.tol, "Newton tolerance");
  add_output_flags(check_discrete, check_discrete_args.common);

  PoissonArgs poisson_args;
  CLI::App* poisson = app.add_subcommand("poisson", "Canonical bracket of two Hamiltonians");
  poisson->add_option("--l1", poisson_args.l1_path, "First system spec file")->required();
  poisson->add_option("--l2", poisson_args.l2_path, "Second system spec file")->required();
  poisson->add_option("--q", poisson_args.q, "Configuration")->required();
  poisson->add_option("--p", poisson_args.p, "Momentum")->required();
  add_output_flags(poisson, poisson_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (catalog->parsed()) return run_catalog(catalog_common);
    if (action->parsed()) return run_action(action_args);
    if (flow->parsed()) return run_flow(flow_args);
    if (hj->parsed()) return run_hj_check(hj_args);
    if (compose->parsed()) return run_compose(compose_args);
    if (check->parsed()) return run_check_commute(check_args);
    if (dmap->parsed()) return run_discrete_map(map_args);
    if (check_discrete->parsed()) return run_check_commute_discrete(check_discrete_args);
    if (poisson->parsed()) return run_poisson(poisson_args);
  } catch (const SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownSystemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidGridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}
