#ifndef COURSEVEC_CLI_HPP
#define COURSEVEC_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace coursevec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `coursevec` tool. `args` excludes the program name.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coursevec

#endif
