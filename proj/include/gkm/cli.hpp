#pragma once

#include <ostream>

namespace gkm {

enum ExitCode : int {
    kExitOk = 0,
    kExitMismatch = 1, // consistency violation, or an outcome contradicting the expected verdict
    kExitUsage = 2,
};

/// Entry point of the `gkm` command line tool; `run`, `compare`, `attack`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace gkm
