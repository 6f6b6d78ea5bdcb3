#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dynopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnknown = 1;  // solver gave up within its budget
inline constexpr int kExitInput = 2;    // invalid input data or parameters
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 66;

inline constexpr int kSchemaVersion = 1;

/// Runs one invocation; `args` excludes the program name. The JSON report goes to `out`
/// (or the --json file), the one-line summary and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dynopt::cli
