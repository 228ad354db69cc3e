#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pgsgan::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumerical = 3 };

// Relative output directories resolve under this directory when it is set.
inline constexpr const char* kOutputRootEnv = "PGSGAN_OUTPUT_ROOT";

// Entry point behind the `pgsgan` executable; `args` excludes argv[0].
// Every failure is reported on `err` and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pgsgan::cli
