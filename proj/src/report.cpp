#include "bsinst/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bsinst {

const char* version() { return "0.1.0"; }

namespace {

const std::set<std::string>& suite_names() {
  static const std::set<std::string> names{"algebra", "models", "g2",          "spin7",
                                           "nk",      "ode",    "asymptotics", "all"};
  return names;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void SuiteConfig::validate() const {
  if (!suite_names().count(suite)) throw std::invalid_argument("unknown suite: " + suite);
  if (kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  if (tol < 0.0) throw std::invalid_argument("tol must be positive");
  if (!(r_min < r_max)) throw std::invalid_argument("r_min must be below r_max");
  if (rho_max <= 10.0) throw std::invalid_argument("rho_max must exceed 10");
  if (format != "json" && format != "csv" && format != "text")
    throw std::invalid_argument("unknown format: " + format);
}

bool SuiteReport::all_pass() const {
  for (const auto& c : cases) {
    if (!c.pass) return false;
  }
  return true;
}

std::string emit_json(const SuiteReport& rep) {
  std::ostringstream os;
  os << "{\"cases\":[";
  for (size_t i = 0; i < rep.cases.size(); ++i) {
    const CaseRecord& c = rep.cases[i];
    if (i) os << ",";
    os << "{\"case_id\":\"" << json_escape(c.case_id) << "\""
       << ",\"max_residual\":" << fmt_double(c.max_residual)
       << ",\"notes\":\"" << json_escape(c.notes) << "\""
       << ",\"params\":\"" << json_escape(c.params) << "\""
       << ",\"pass\":" << (c.pass ? "true" : "false")
       << ",\"samples\":" << c.samples
       << ",\"suite\":\"" << json_escape(c.suite) << "\""
       << ",\"tol\":" << fmt_double(c.tol) << "}";
  }
  os << "],\"seed\":" << rep.seed << ",\"version\":\"" << json_escape(rep.version) << "\""
     << ",\"wall_time_ms\":" << fmt_double(rep.wall_time_ms) << "}\n";
  return os.str();
}

std::string emit_csv(const SuiteReport& rep) {
  std::ostringstream os;
  os << "suite,case_id,params,samples,max_residual,tol,pass,notes\n";
  for (const CaseRecord& c : rep.cases) {
    os << c.suite << "," << c.case_id << "," << c.params << "," << c.samples << ","
       << fmt_double(c.max_residual) << "," << fmt_double(c.tol) << ","
       << (c.pass ? "true" : "false") << "," << c.notes << "\n";
  }
  return os.str();
}

std::string emit_text(const SuiteReport& rep, bool use_color) {
  const char* green = use_color ? "\033[32m" : "";
  const char* red = use_color ? "\033[31m" : "";
  const char* reset = use_color ? "\033[0m" : "";
  std::ostringstream os;
  int failures = 0;
  for (const CaseRecord& c : rep.cases) {
    if (!c.pass) ++failures;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-34s %10.3e <= %8.1e ", c.suite.c_str(),
                  c.case_id.c_str(), c.max_residual, c.tol);
    os << line << (c.pass ? green : red) << (c.pass ? "pass" : "FAIL") << reset;
    if (!c.params.empty()) os << "  [" << c.params << "]";
    if (!c.notes.empty()) os << "  " << c.notes;
    os << "\n";
  }
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.1f", rep.wall_time_ms);
  os << rep.cases.size() << " cases, " << failures << " failure" << (failures == 1 ? "" : "s")
     << " (seed " << rep.seed << ", " << wall << " ms, v" << rep.version << ")\n";
  return os.str();
}

std::string emit_report(const SuiteReport& rep, const std::string& format) {
  if (format == "json") return emit_json(rep);
  if (format == "csv") return emit_csv(rep);
  if (format == "text") {
    bool color = std::getenv("NO_COLOR") == nullptr;
    return emit_text(rep, color);
  }
  throw std::invalid_argument("unknown format: " + format);
}

}  // namespace bsinst
