#include <iostream>
#include <string>
#include <vector>

#include "embedgeom/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return embedgeom::run_cli(args, std::cout, std::cerr);
}
