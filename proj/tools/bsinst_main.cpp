#include <iostream>
#include <vector>

#include "bsinst/suite.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bsinst::cli_run(args, std::cout, std::cerr);
}
