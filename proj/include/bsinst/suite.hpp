#pragma once

#include <iosfwd>

#include "bsinst/report.hpp"

namespace bsinst {

SuiteReport run_suite(const SuiteConfig& config);

// Full command-line entry point (flags, config file, report emission).
// Returns the process exit code: 0 all pass, 1 residual failure, 2 usage.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsinst
