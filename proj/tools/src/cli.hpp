#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace fairens::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInvariant = 3 };

/// Runs one command line (without the program name). Artifacts go to the
/// paths named by --out; diagnostics go to `err`.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace fairens::cli
