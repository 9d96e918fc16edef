#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsinst {

const char* version();

struct SuiteConfig {
  std::string suite = "all";
  double kappa = 1.0;
  std::vector<double> c_list{-2.9, -1.0, 0.0, 1.0, 10.0};
  std::vector<double> d_list{0.0, 1.0, 10.0};
  int samples = 100;
  std::uint64_t seed = 42;
  double tol = 0.0;  // 0 keeps the per-case defaults
  double r_min = 1e-2;
  double r_max = 100.0;
  double rho_max = 1000.0;
  std::string out_path;  // empty writes to stdout
  std::string format = "json";

  void validate() const;  // throws std::invalid_argument on bad fields
};

struct CaseRecord {
  std::string suite;
  std::string case_id;
  std::string params;
  int samples = 0;
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string notes;
};

struct SuiteReport {
  std::string version;
  std::uint64_t seed = 0;
  std::vector<CaseRecord> cases;
  double wall_time_ms = 0.0;

  bool all_pass() const;
};

// json: one object, keys sorted, floats with 17 significant digits; identical
// configs and seeds give byte-identical output except the wall_time_ms field.
std::string emit_json(const SuiteReport& rep);
// csv: fixed header suite,case_id,params,samples,max_residual,tol,pass,notes
std::string emit_csv(const SuiteReport& rep);
std::string emit_text(const SuiteReport& rep, bool use_color);
std::string emit_report(const SuiteReport& rep, const std::string& format);

}  // namespace bsinst
