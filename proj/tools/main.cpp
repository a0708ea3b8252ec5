#include "penhmm/cli.hpp"

int main(int argc, char** argv) {
  return penhmm::run_cli(std::vector<std::string>(argv, argv + argc));
}
