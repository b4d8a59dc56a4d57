#include <iostream>
#include <string>
#include <vector>

#include "xmodal_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return xmodal::cli::run(args, std::cout, std::cerr);
}
