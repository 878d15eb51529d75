#include <iostream>
#include <string>
#include <vector>

#include "tacgap/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return tacgap::cli::run(args, std::cout, std::cerr);
}
