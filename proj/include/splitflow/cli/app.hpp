#pragma once

// Command-line front end. Exit codes: 0 ok, 2 usage or validation,
// 3 numeric or convergence failure, 4 I/O or network failure.

#include <iosfwd>

namespace splitflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

/// Runs one invocation. `out` receives results unless --out names a file.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace splitflow::cli
