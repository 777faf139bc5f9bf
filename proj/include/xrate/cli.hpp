#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xrate::cli {

/// Exit codes: 0 success, 1 invalid input, 2 a computation contract failed.
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 1;
inline constexpr int kContractFailure = 2;

/// Runs one command line (without the program name). Results go to `out`
/// or to the --out file, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xrate::cli
