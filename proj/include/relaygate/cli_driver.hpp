#pragma once

#include <string>
#include <vector>

namespace relaygate {

// Exit codes: 0 success, 1 usage error, 2 config error, 3 infeasible
// problem, 4 solver did not converge.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

} // namespace relaygate
