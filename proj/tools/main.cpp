#include <vector>

#include "icevp/cli.hpp"

int main(int argc, char** argv) {
  return icevp::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
