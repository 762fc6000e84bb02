#pragma once

#include <ostream>

namespace microem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNonConvergence = 3;

/// Subcommands run, eoc and info. Never throws; failures map to exit codes:
/// 2 for bad arguments or configuration, 3 when a Picard iteration does not
/// converge, 1 for anything else.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace microem
