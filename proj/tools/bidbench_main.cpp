#include <iostream>
#include <string>
#include <vector>

#include "bidbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bidbench::run_cli(std::move(args), std::cout, std::cerr);
}
