// Command-line front end: simulate | fringe | bell | fit | reproduce.

#pragma once

#include <iosfwd>

namespace franson::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComparisonFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. Messages go to `out`, errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace franson::app
