#ifndef PENHMM_CLI_HPP
#define PENHMM_CLI_HPP

#include <string>
#include <vector>

namespace penhmm {

// Command-line entry point. args[0] is the program name. Returns 0 on
// success, 2 on usage or input errors, 3 on numerical failure.
int run_cli(std::vector<std::string> args);

}  // namespace penhmm

#endif  // PENHMM_CLI_HPP
