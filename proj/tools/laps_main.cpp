#include <string>
#include <vector>

#include "laps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return laps::cli::run(args);
}
