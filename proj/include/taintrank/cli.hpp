#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace taintrank::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kMalformedInput = 2,
  kBadConfig = 3,
};

/// Runs one command line (without the program name). Data goes to files,
/// the one-line JSON summary to `out`, logs and errors to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace taintrank::cli
