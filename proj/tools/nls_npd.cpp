#include <iostream>
#include <string>
#include <vector>

#include "nlsnpd/cli_io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return nlsnpd::cli::run_cli(args, std::cout, std::cerr);
}
