#pragma once

#include <ostream>

#include "idforge/error.hpp"

namespace idforge::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Usage errors (bad arguments) map to 1, data problems to 2.
ExitCode exit_code_for(ErrorKind kind) noexcept;

// Entry point of the `idforge` binary; streams are injectable for tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace idforge::cli
