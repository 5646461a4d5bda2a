#pragma once

#include <ostream>

namespace unifilter::cli {

/// Runs the command line. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unifilter::cli
