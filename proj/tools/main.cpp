#include <iostream>
#include <string>
#include <vector>

#include "softshift/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return softshift::cli::run(args, std::cout, std::cerr);
}
