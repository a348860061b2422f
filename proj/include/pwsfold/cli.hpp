#pragma once

// Command-line front end. Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace pwsfold::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kNumericalError = 3;

/// Runs one command; `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pwsfold::cli
