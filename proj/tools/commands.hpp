#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abft_guard::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;  // --expect-detect / --expect-clean not met
inline constexpr int kExitUsage = 2;     // bad arguments or documents

/// Runs `abft-guard` with `args` (args[0] is the program name). Documents go
/// to `out`, tables and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abft_guard::cli
