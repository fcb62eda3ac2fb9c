#include "commact/report.hpp"

#include "commact/version.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace commact {

namespace {

// Minimal JSON emitter with fixed field order and fixed number formatting.
class JsonWriter {
 public:
  explicit JsonWriter(std::string& out) : out_(out) {}

  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(const std::string& name) {
    separate();
    indent();
    out_ += '"';
    out_ += escaped(name);
    out_ += "\": ";
    pending_value_ = true;
  }

  void value_raw(const std::string& fragment) {
    if (!pending_value_) {
      separate();
      indent();
    }
    out_ += fragment;
    pending_value_ = false;
    fresh_ = false;
  }

  void value(double v) { value_raw(format_number(v)); }
  void value(int v) { value_raw(std::to_string(v)); }
  void value(bool v) { value_raw(v ? "true" : "false"); }
  void value(const std::string& s) { value_raw("\"" + escaped(s) + "\""); }

 private:
  void open(char c) {
    if (!pending_value_) {
      separate();
      indent();
    }
    out_ += c;
    out_ += '\n';
    ++depth_;
    fresh_ = true;
    pending_value_ = false;
  }

  void close(char c) {
    --depth_;
    out_ += '\n';
    indent();
    out_ += c;
    fresh_ = false;
  }

  void separate() {
    if (!fresh_) out_ += ",\n";
    fresh_ = false;
  }

  void indent() {
    for (int i = 0; i < depth_; ++i) out_ += "  ";
  }

  static std::string escaped(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out += c;
          }
      }
    }
    return out;
  }

  std::string& out_;
  int depth_ = 0;
  bool fresh_ = true;
  bool pending_value_ = false;
};

void write_vector(JsonWriter& w, const Vector& v) {
  w.begin_array();
  for (int i = 0; i < v.size(); ++i) w.value(v[i]);
  w.end_array();
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::commuting: return "commuting";
    case Verdict::non_commuting: return "non-commuting";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void finalize_report(CommutativityReport& report) {
  ReportSummary s;
  int failed = 0;
  bool pointwise_noncommuting = false;
  for (const ReportPoint& pt : report.points) {
    if (!pt.ok) {
      ++failed;
      continue;
    }
    s.max_action_commutator = std::max(s.max_action_commutator, std::abs(pt.action_commutator));
    s.max_error_estimate = std::max(s.max_error_estimate, pt.error_estimate);
    s.max_poisson_bracket = std::max(s.max_poisson_bracket, std::abs(pt.poisson_bracket));
    s.max_flow_commutator = std::max(s.max_flow_commutator, pt.flow_commutator);
    if (pt.d_p0.size() > 0) {
      s.max_endpoint_mismatch =
          std::max({s.max_endpoint_mismatch, pt.d_p0.lpNorm<Eigen::Infinity>(),
                    pt.d_p12.lpNorm<Eigen::Infinity>()});
    }
    s.max_energy_residual = std::max({s.max_energy_residual, std::abs(pt.r_h1), std::abs(pt.r_h2)});
    s.max_junction_jump =
        std::max({s.max_junction_jump, pt.junction_jump_12, pt.junction_jump_21});
    if (pt.corner_e0.size() > 0) {
      s.max_corner_residual =
          std::max({s.max_corner_residual, pt.corner_e0.lpNorm<Eigen::Infinity>(),
                    pt.corner_e12.lpNorm<Eigen::Infinity>()});
    }
    if (std::abs(pt.action_commutator) > report.noncommuting_factor * pt.error_estimate) {
      pointwise_noncommuting = true;
    }
  }
  for (const PhaseProbe& probe : report.phase_probes) {
    if (!probe.ok) {
      ++failed;
      continue;
    }
    s.max_poisson_bracket = std::max(s.max_poisson_bracket, std::abs(probe.poisson_bracket));
    s.max_flow_commutator = std::max(s.max_flow_commutator, probe.flow_commutator);
  }
  report.summary = s;
  report.failed_points = failed;

  const int total = static_cast<int>(report.points.size() + report.phase_probes.size());
  if (total == 0 || failed * 10 > total) {
    report.verdict = Verdict::inconclusive;
  } else if (pointwise_noncommuting) {
    report.verdict = Verdict::non_commuting;
  } else if (s.max_action_commutator <= report.commuting_factor * s.max_error_estimate) {
    report.verdict = Verdict::commuting;
  } else {
    report.verdict = Verdict::inconclusive;
  }
}

std::string report_to_json(const CommutativityReport& report) {
  std::string out;
  JsonWriter w(out);
  w.begin_object();

  w.key("config");
  w.begin_object();
  w.key("mode");
  w.value(report.mode);
  w.key("system1");
  w.value(report.system1);
  w.key("system2");
  w.value(report.system2);
  w.key("grid");
  w.value(report.grid);
  w.key("qrange");
  w.value(report.qrange);
  if (report.mode == "continuous") {
    w.key("times");
    w.begin_array();
    for (const auto& [t1, t2] : report.times) {
      w.begin_array();
      w.value(t1);
      w.value(t2);
      w.end_array();
    }
    w.end_array();
  }
  w.key("tol");
  w.value(report.tol);
  w.key("commuting_factor");
  w.value(report.commuting_factor);
  w.key("noncommuting_factor");
  w.value(report.noncommuting_factor);
  for (const auto& [key, fragment] : report.config_echo) {
    w.key(key);
    w.value_raw(fragment);
  }
  w.end_object();

  w.key("points");
  w.begin_array();
  for (const ReportPoint& pt : report.points) {
    w.begin_object();
    w.key("q0");
    write_vector(w, pt.q0);
    w.key("q12");
    write_vector(w, pt.q12);
    if (report.mode == "continuous") {
      w.key("t1");
      w.value(pt.t1);
      w.key("t2");
      w.value(pt.t2);
    }
    w.key("ok");
    w.value(pt.ok);
    if (!pt.ok) {
      w.key("error");
      w.value(pt.error);
    } else {
      w.key("s12");
      w.value(pt.s12);
      w.key("s21");
      w.value(pt.s21);
      w.key("action_commutator");
      w.value(pt.action_commutator);
      w.key("error_estimate");
      w.value(pt.error_estimate);
      if (report.mode == "continuous") {
        w.key("d_p0");
        write_vector(w, pt.d_p0);
        w.key("d_p12");
        write_vector(w, pt.d_p12);
        w.key("energy_transport_residuals");
        w.begin_array();
        w.value(pt.r_h1);
        w.value(pt.r_h2);
        w.end_array();
        w.key("junction_jump_12");
        w.value(pt.junction_jump_12);
        w.key("junction_jump_21");
        w.value(pt.junction_jump_21);
        w.key("poisson_bracket");
        w.value(pt.poisson_bracket);
        w.key("flow_commutator");
        w.value(pt.flow_commutator);
      } else {
        w.key("corner_residual_e0");
        write_vector(w, pt.corner_e0);
        w.key("corner_residual_e12");
        write_vector(w, pt.corner_e12);
        w.key("map_commutator");
        w.value(pt.flow_commutator);
      }
    }
    w.end_object();
  }
  w.end_array();

  w.key("phase_probes");
  w.begin_array();
  for (const PhaseProbe& probe : report.phase_probes) {
    w.begin_object();
    w.key("q");
    write_vector(w, probe.q);
    w.key("p");
    write_vector(w, probe.p);
    w.key("ok");
    w.value(probe.ok);
    if (!probe.ok) {
      w.key("error");
      w.value(probe.error);
    } else if (report.mode == "continuous") {
      w.key("poisson_bracket");
      w.value(probe.poisson_bracket);
      w.key("flow_commutator");
      w.value(probe.flow_commutator);
    } else {
      w.key("map_commutator");
      w.value(probe.flow_commutator);
    }
    w.end_object();
  }
  w.end_array();

  w.key("summary");
  w.begin_object();
  w.key("max_action_commutator");
  w.value(report.summary.max_action_commutator);
  w.key("max_poisson_bracket");
  w.value(report.summary.max_poisson_bracket);
  w.key("max_flow_commutator");
  w.value(report.summary.max_flow_commutator);
  w.key("max_error_estimate");
  w.value(report.summary.max_error_estimate);
  if (report.mode == "continuous") {
    w.key("max_endpoint_mismatch");
    w.value(report.summary.max_endpoint_mismatch);
    w.key("max_energy_residual");
    w.value(report.summary.max_energy_residual);
    w.key("max_junction_jump");
    w.value(report.summary.max_junction_jump);
  } else {
    w.key("max_corner_residual");
    w.value(report.summary.max_corner_residual);
  }
  w.key("failed_points");
  w.value(report.failed_points);
  w.end_object();

  w.key("verdict");
  w.value(std::string(to_string(report.verdict)));
  w.key("tool_version");
  w.value(std::string(kToolVersion));

  w.end_object();
  out += '\n';
  return out;
}

std::string report_to_text(const CommutativityReport& report) {
  std::ostringstream out;
  out << "commutativity report (" << report.mode << ")\n";
  out << "  systems: " << report.system1 << " vs " << report.system2 << "\n";
  out << "  grid: " << report.grid << "x" << report.grid << " in [-" << format_number(report.qrange)
      << ", " << format_number(report.qrange) << "]\n";
  if (report.mode == "continuous") {
    out << "  times:";
    for (const auto& [t1, t2] : report.times) {
      out << " (" << format_number(t1) << ", " << format_number(t2) << ")";
    }
    out << "\n";
  }
  out << "  tol: " << format_number(report.tol) << "\n";
  out << "  points evaluated: " << report.points.size() << " (+" << report.phase_probes.size()
      << " phase probes), failed: " << report.failed_points << "\n";
  out << "  max |S12 - S21|:    " << format_number(report.summary.max_action_commutator) << "\n";
  out << "  max error estimate: " << format_number(report.summary.max_error_estimate) << "\n";
  if (report.mode == "continuous") {
    out << "  max |{H1,H2}|:      " << format_number(report.summary.max_poisson_bracket) << "\n";
    out << "  max flow commutator: " << format_number(report.summary.max_flow_commutator) << "\n";
    out << "  max endpoint momentum mismatch: "
        << format_number(report.summary.max_endpoint_mismatch) << "\n";
    out << "  max energy transport residual:  "
        << format_number(report.summary.max_energy_residual) << "\n";
    out << "  max junction momentum jump:     " << format_number(report.summary.max_junction_jump)
        << "\n";
  } else {
    out << "  max map commutator:   " << format_number(report.summary.max_flow_commutator) << "\n";
    out << "  max corner residual:  " << format_number(report.summary.max_corner_residual) << "\n";
  }
  out << "  verdict: " << to_string(report.verdict) << "\n";
  return out.str();
}

}  // namespace commact
