#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace convroof::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNontermination = 3;
inline constexpr int kExitDomain = 4;

/// Runs one command line. `args` excludes the program name. Diagnostics go to
/// `err`; results go to `out` unless --output names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace convroof::cli
