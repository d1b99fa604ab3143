#pragma once

#include <iosfwd>

namespace tactics {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;  // model, training or validation failure
inline constexpr int kExitUsage = 2;    // bad arguments or unreadable files

/// Entry point behind the `tactics` binary; writes to the given streams
/// instead of the process ones so it can be driven in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tactics
