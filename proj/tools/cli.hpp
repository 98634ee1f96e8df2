#pragma once

#include <string>
#include <vector>

namespace mpilab::cli {

/// Runs one command line (argv[0] is the program name) and returns the exit
/// code: 0 success, 2 validation error, 3 numeric or degenerate geometry,
/// 4 I/O, 1 unexpected internal failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace mpilab::cli
