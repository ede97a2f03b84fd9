#pragma once

#include <string>
#include <vector>

namespace farrkit {

// Subcommands: chunk, extract, lint, evaluate, report, convgen, stats.
// Exit codes: 0 success, 1 pipeline error, 2 usage error.
int run_cli(int argc, const char* const* argv);

// Convenience for tests; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace farrkit
