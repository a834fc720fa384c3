#pragma once

#include <string>
#include <vector>

namespace specloc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: one class per failure kind.
enum ExitCode {
    kOk = 0,
    kFailure = 1,     ///< uncategorized
    kUsage = 2,       ///< bad flags / flag combinations
    kValidation = 3,  ///< input data violates a precondition
    kNumeric = 4,     ///< NaN/Inf, solver failure, or a failed numeric check
    kIo = 5,          ///< filesystem errors
};

/// Run one subcommand; `args` excludes the program name. Errors are
/// printed to stderr and mapped to the exit codes above.
int run(const std::vector<std::string>& args);

int run(int argc, const char* const* argv);

} // namespace specloc::cli
