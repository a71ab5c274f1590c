#pragma once

#include <string>
#include <vector>

namespace emsx {

/// Runs the command-line tool; returns the process exit status
/// (0 success, 1 validation error, 2 simulation fault).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace emsx
