#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prefplan::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, runtime_error = 1, usage_error = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prefplan::cli
