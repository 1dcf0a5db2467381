#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metaforge {

/// Exit codes of the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int invalid = 1;  // validation errors found
inline constexpr int usage = 2;
inline constexpr int failure = 3;  // I/O or model error
}  // namespace exit_code

/// Runs `metaforge <args...>` (args exclude the program name). Results go
/// to `out`; failures are one JSON error object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metaforge
