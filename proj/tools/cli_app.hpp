#pragma once

#include <iosfwd>

namespace intent::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeError = 1, kUsageError = 2 };

/// Entry point of the `intent` tool, with the streams injectable for tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace intent::cli
