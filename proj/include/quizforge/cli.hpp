#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quizforge::cli {

/// Exit codes: 0 success, 1 usage or validation failure, 2 I/O or network
/// failure.
enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

/// Runs `quizforge <args...>` (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quizforge::cli
