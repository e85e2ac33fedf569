#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tse::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kTransportError = 4,
  kPartialScoring = 5,
};

// Entry point for `tsekit`. Subcommands: generate, score, analyze,
// validate-sample. Errors are reported on `err` as one JSON object and mapped
// to the exit codes above. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace tse::cli
