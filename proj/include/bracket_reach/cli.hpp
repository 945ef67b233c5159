#pragma once

#include <iosfwd>

namespace bracket_reach::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv (argv[0] is the program name) and runs one subcommand:
/// analyze, verify, radius, steer or connect.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bracket_reach::cli
