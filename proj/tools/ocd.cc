#include <iostream>
#include <string>
#include <vector>

#include "ocd/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return ocd::RunCli(args, std::cout, std::cerr);
}
