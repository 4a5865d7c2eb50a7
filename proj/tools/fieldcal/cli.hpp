#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fieldcal::cli {

enum ExitCode : int {
    kOk = 0,
    kMalformedInput = 2,
    kSolverFailure = 3,
    kInvalidFlag = 4,
};

// Runs one `fieldcal <subcommand> ...` invocation. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fieldcal::cli
