#pragma once

#include <iosfwd>

namespace biharm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 1,
  kNumeric = 2,
  kVerification = 3,
};

/// Parses argv and runs one subcommand. Reports go to `out`, diagnostics to
/// `err`. Returns one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biharm::cli
