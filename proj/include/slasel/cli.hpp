#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slasel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoFeasible = 3;
inline constexpr int kExitFailure = 1;

/// Runs one `sla-select` command. `args` excludes the program name. Data goes
/// to `out`, diagnostics and logs to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace slasel::cli
