#include <iostream>
#include <string>
#include <vector>

#include "teleop/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return teleop::cli::main_entry(args, std::cout, std::cerr);
}
