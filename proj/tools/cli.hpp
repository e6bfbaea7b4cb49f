// SPDX-License-Identifier: Apache-2.0
#ifndef VIDEOMINER_TOOLS_CLI_HPP_
#define VIDEOMINER_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace videominer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by main() and the tests. args[0] is the program name.
// Machine output goes to `out`, logs and structured errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace videominer::cli

#endif  // VIDEOMINER_TOOLS_CLI_HPP_
