#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace apm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kComputationError = 1;
inline constexpr int kUsageError = 2;

// args excludes the program name. Reports go to out (or --out), diagnostics
// to err.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace apm::cli
