#include <iostream>
#include <vector>

#include "strataform/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return strataform::io::run_cli(args, std::cout, std::cerr);
}
