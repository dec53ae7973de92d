#include <string>
#include <vector>

#include "sot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sot::run_cli(args);
}
