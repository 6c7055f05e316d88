#pragma once

#include <iosfwd>

namespace d2d {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the command-line tool:
///   analyze | simulate | optimize | sweep | compare
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace d2d
