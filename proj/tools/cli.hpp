#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation. `args` excludes the program name. Primary output
/// goes to --out when given, otherwise to `out`; diagnostics and the resolved
/// configuration go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nis::cli
