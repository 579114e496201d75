#pragma once

// Command-line front end: estimate | simulate | diagnose.
//
// Exit codes: 0 success, 2 input or usage error, 3 estimator did not converge.

#include <ostream>
#include <string>
#include <vector>

namespace svmbcm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNotConverged = 3;

/// `args` excludes the program name. Results go to `out` unless --output is
/// given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svmbcm::cli
