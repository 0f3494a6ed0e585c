#pragma once

#include <iosfwd>

namespace macpp {

/// Entry point of the command-line driver. Returns the process exit code:
/// 0 success, 1 usage/config/input error, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace macpp
