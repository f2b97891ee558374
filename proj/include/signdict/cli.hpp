#pragma once

#include <iosfwd>

namespace signdict {

// Entry point behind the `signdict` binary. Exit codes: 0 success, 1
// operational failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace signdict
