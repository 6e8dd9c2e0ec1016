#include <iostream>
#include <string>
#include <vector>

#include "taintrank/cli.hpp"

int main(int argc, char* argv[]) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return taintrank::cli::run(args, std::cout, std::cerr);
}
