#include <iostream>
#include <string>
#include <vector>

#include "liftcert/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return liftcert::run_cli(args, std::cout, std::cerr);
}
