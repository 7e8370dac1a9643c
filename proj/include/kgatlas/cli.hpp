#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgatlas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on an operation error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgatlas::cli
