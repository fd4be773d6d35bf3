#include <iostream>
#include <string>
#include <vector>

#include "xmover/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return xmover::run_cli(args, std::cout, std::cerr);
}
