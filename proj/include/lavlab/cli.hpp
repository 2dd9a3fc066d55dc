#pragma once

#include <string>
#include <vector>

namespace lavlab {

/// Entry point of the command-line tool; takes argv-style arguments
/// (without the program name) and returns the process exit code.
/// Exposed as a library call so tests can drive commands in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace lavlab
