#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scolab::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kConfigError = 2 };

/// Runs one command line (args exclude the program name). Normal output goes to
/// `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scolab::cli
