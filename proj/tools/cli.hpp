#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kfdpc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kBadArguments = 2,
  kMalformedInput = 3,
};

/// Runs one CLI invocation. `args` excludes the program name. Results go to
/// `out` unless an output path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kfdpc::cli
