#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace longmem::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kValidation = 1,  // bad flags, unreadable paths, invalid parameters
    kRuntime = 2,     // data or analysis failure
    kPartial = 3,     // some series failed and --strict was given
};

/// Runs the `longmem` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace longmem::cli
