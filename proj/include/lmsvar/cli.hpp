#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmsvar {

/// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComparisonFailed = 1;
inline constexpr int kExitError = 2;

/// Entry point of the `lmsvar` tool. `args` excludes the program name.
/// Subcommands: predict, simulate, ensemble, coverage, quantile.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lmsvar
