#include "cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return semvol::cli::run(args, std::cout, std::cerr);
}
