#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace liftcert {

/// Exit codes: 0 all checks pass, 1 some check or bound fails, 2 invalid input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalid = 2;

/// Runs one command line (without the program name). Machine-readable output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liftcert
