#include <iostream>

#include "slam3d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slam3d::run_cli(args, std::cout, std::cerr);
}
