#include <iostream>
#include <string>
#include <vector>

#include "bitext/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bitext::cli::run(std::move(args), std::cout, std::cerr);
}
