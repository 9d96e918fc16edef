#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "bsinst/suite.hpp"

namespace bsinst {

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  SuiteConfig cfg;
  CLI::App app{"Verification suites for the explicit G2 / Spin(7) instantons on the "
               "Bryant-Salamon manifolds"};
  app.add_option("--suite", cfg.suite,
                 "suite to run: algebra, models, g2, spin7, nk, asymptotics, ode, all")
      ->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "base curvature constant")->capture_default_str();
  app.add_option("--c", cfg.c_list, "G2 solution parameters C")->delimiter(',');
  app.add_option("--d", cfg.d_list, "Spin(7) solution parameters D")->delimiter(',');
  app.add_option("--samples", cfg.samples, "random samples per case")->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--tol", cfg.tol, "override every per-case tolerance (0 keeps defaults)");
  app.add_option("--r-min", cfg.r_min, "lower radial cutoff for singular bases")
      ->capture_default_str();
  app.add_option("--r-max", cfg.r_max, "upper end of instanton r grids")->capture_default_str();
  app.add_option("--rho-max", cfg.rho_max, "upper end of asymptotic fits")->capture_default_str();
  app.add_option("--out", cfg.out_path, "output file (default: stdout)");
  app.add_option("--format", cfg.format, "json, csv or text")->capture_default_str();
  app.set_config("--config", "", "key=value config file; command line wins");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  SuiteReport rep;
  try {
    cfg.validate();
    rep = run_suite(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::string payload = emit_report(rep, cfg.format);
  if (cfg.out_path.empty()) {
    out << payload;
  } else {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot open output path " << cfg.out_path << "\n";
      return 2;
    }
    f << payload;
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace bsinst
