// Acceptance gate: one line per criterion, exit code 1 when any fails.
#include <cstdio>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "bsinst/suite.hpp"

using namespace bsinst;

namespace {

int failures = 0;

void grade(int n, const std::string& desc, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", n, desc.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  if (!ok) ++failures;
}

std::vector<const CaseRecord*> collect(const SuiteReport& rep, const std::string& id_prefix) {
  std::vector<const CaseRecord*> out;
  for (const auto& c : rep.cases) {
    if (c.case_id.rfind(id_prefix, 0) == 0) out.push_back(&c);
  }
  return out;
}

// every case with the prefix exists and passes
bool all_pass(const SuiteReport& rep, const std::string& prefix, std::string* why = nullptr) {
  auto cs = collect(rep, prefix);
  if (cs.empty()) {
    if (why) *why += prefix + ": no such case; ";
    return false;
  }
  bool ok = true;
  for (const auto* c : cs) {
    if (!c->pass) {
      ok = false;
      if (why) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s[%s]: %.3g > %.2g; ", c->case_id.c_str(),
                      c->params.c_str(), c->max_residual, c->tol);
        *why += buf;
      }
    }
  }
  return ok;
}

std::string strip_wall(std::string s) {
  return std::regex_replace(s, std::regex("\"wall_time_ms\":[-+0-9.eE]+"), "\"wall_time_ms\":0");
}

}  // namespace

int main() {
  SuiteConfig cfg;
  cfg.seed = 42;
  cfg.kappa = 1.0;
  cfg.c_list = {-2.9, -1.0, 0.0, 1.0, 10.0};
  cfg.d_list = {0.0, 1.0, 10.0};
  cfg.r_min = 1e-2;
  cfg.r_max = 100.0;
  cfg.rho_max = 1000.0;

  cfg.suite = "algebra";
  cfg.samples = 1000;
  SuiteReport algebra = run_suite(cfg);
  cfg.samples = 100;
  cfg.suite = "models";
  SuiteReport models = run_suite(cfg);
  cfg.suite = "g2";
  SuiteReport g2 = run_suite(cfg);
  cfg.suite = "spin7";
  SuiteReport spin7 = run_suite(cfg);
  cfg.suite = "nk";
  SuiteReport nk = run_suite(cfg);
  cfg.suite = "asymptotics";
  SuiteReport asym = run_suite(cfg);
  cfg.suite = "ode";
  SuiteReport ode = run_suite(cfg);

  std::string why;

  // 1. the two quaternionic 1-form identities over 1000 random forms at 1e-13
  why.clear();
  grade(1, "quaternionic 1-form identities (1000 samples, 1e-13)",
        all_pass(algebra, "one_form_square", &why) && all_pass(algebra, "triple_product", &why),
        why);

  // 2. derivative/product identity tables coefficientwise at 1e-12, 100 points
  why.clear();
  grade(2, "derivative/product identities at 100 random bundle points (1e-12)",
        all_pass(g2, "derivative_product_identities", &why) && all_pass(spin7, "derivative_product_identities", &why) &&
            all_pass(g2, "psi_wedge_table", &why) && all_pass(spin7, "psi_wedge_table", &why),
        why);

  // 3. closedness for kappa in {1,2} plus general-profile derivative formulas
  why.clear();
  grade(3, "closedness of gamma, *gamma, Psi and the general-profile formulas",
        all_pass(models, "g2_closedness", &why) && all_pass(models, "spin7_closedness", &why) &&
            all_pass(models, "g2_general_profile_derivatives", &why),
        why);

  // 4. numeric curvature equals the closed-form decompositions at 1e-10
  why.clear();
  grade(4, "curvature equivalence, solutions and random profiles (1e-10)",
        all_pass(g2, "curvature_match", &why) && all_pass(spin7, "curvature_match", &why), why);

  // 5. instanton residuals on the r grids, plus perturbation sensors
  why.clear();
  grade(5, "instanton residuals for the closed-form families plus sensors",
        all_pass(g2, "instanton_psi_wedge_F", &why) &&
            all_pass(g2, "instanton_star_identity", &why) &&
            all_pass(g2, "instanton_residual_sensor", &why) &&
            all_pass(spin7, "instanton_numeric", &why) &&
            all_pass(spin7, "instanton_closed_form_route", &why) &&
            all_pass(spin7, "instanton_residual_sensor", &why),
        why);

  // 6. non-triviality; the D = 0 member is flat (documented defect), so this
  //    criterion reports the honest failure
  why.clear();
  bool c6 = all_pass(g2, "nontriviality", &why) && all_pass(spin7, "nontriviality_D0", &why) &&
            all_pass(nk, "hym_nonflat", &why);
  grade(6, "non-triviality of the solution curvatures (C=0, D=0, Atilde)", c6,
        why + (c6 ? "" : "D=0 gives f=1/r whose curvature vanishes identically"));

  // 7. two-form spectra, projectors and eigenspace membership
  why.clear();
  grade(7, "eigenvalues {-2 x7,+1 x14} / {-3 x7,+1 x21}, projectors, P7 F",
        all_pass(g2, "two_form_spectrum", &why) && all_pass(g2, "spectrum_projectors", &why) &&
            all_pass(g2, "curvature_in_lambda2_14", &why) &&
            all_pass(spin7, "two_form_spectrum", &why) &&
            all_pass(spin7, "spectrum_projectors", &why) &&
            all_pass(spin7, "curvature_in_lambda2_21", &why),
        why);

  // 8. nearly Kaehler identities and HYM residuals at 1e-10
  why.clear();
  grade(8, "nearly Kaehler / SU(3) identities and HYM residuals of Atilde",
        all_pass(nk, "d_varpi_equals_3_Omega1", &why) &&
            all_pass(nk, "d_Omega2_equals_minus_2_varpi_sq", &why) &&
            all_pass(nk, "varpi_wedge_Omega1", &why) &&
            all_pass(nk, "varpi_wedge_Omega2", &why) &&
            all_pass(nk, "volume_varpi_cubed", &why) &&
            all_pass(nk, "volume_Omega_pair", &why) &&
            all_pass(nk, "hym_residuals_Atilde", &why),
        why);

  // 9. asymptotics: metric decay 3.00 +- 0.05, connection decay >= 2.9
  why.clear();
  grade(9, "asymptotic decay exponents (metric 3.00 +- 0.05; connection >= 2.9)",
        all_pass(asym, "metric_decay_exponent", &why) &&
            all_pass(asym, "connection_decay_exponent", &why),
        why);

  // 10. ODE machinery
  why.clear();
  grade(10, "closed-form residuals, RK4 accuracy and order, D=5C, g=0 invariance",
        all_pass(ode, "closed_form_g2", &why) && all_pass(ode, "closed_form_spin7_f", &why) &&
            all_pass(ode, "closed_form_spin7_g", &why) &&
            all_pass(ode, "rk4_vs_closed_form", &why) && all_pass(ode, "rk4_order_ratio", &why) &&
            all_pass(ode, "d_equals_5c_identity", &why) &&
            all_pass(ode, "coupled_system_g_invariance", &why),
        why);

  // 11. singularity scans including the flagged D-family discrepancy
  why.clear();
  bool flagged = false;
  for (const auto* c : collect(ode, "scan_spin7_D_family")) {
    flagged = flagged || c->notes.find("discrepancy") != std::string::npos;
  }
  grade(11, "singularity scans (C=-4 root, smooth family, flagged D family)",
        all_pass(ode, "scan_g2_C_minus4", &why) && all_pass(ode, "scan_g2_smooth_family", &why) &&
            all_pass(ode, "scan_spin7_D_family", &why) && flagged,
        why + (flagged ? "" : "discrepancy note missing"));

  // 12. CLI determinism and the exit-code contract
  {
    SuiteConfig small;
    small.suite = "algebra";
    small.samples = 20;
    small.seed = 777;
    std::string a = strip_wall(emit_json(run_suite(small)));
    std::string b = strip_wall(emit_json(run_suite(small)));
    std::ostringstream sink, err;
    bool codes = cli_run({"--suite", "algebra", "--samples", "5"}, sink, err) == 0 &&
                 cli_run({"--suite", "algebra", "--samples", "5", "--tol", "1e-300"}, sink,
                         err) == 1 &&
                 cli_run({"--suite", "bogus"}, sink, err) == 2;
    grade(12, "byte-identical JSON modulo wall time; exit codes 0/1/2", a == b && codes,
          a == b ? (codes ? "" : "exit codes off") : "reports differ");
  }

  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures ? 1 : 0;
}
