#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace multipath::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;  // an internal consistency check failed
inline constexpr int kUsage = 2;     // bad flags, unreadable or malformed input
inline constexpr int kDomain = 3;    // instability, non-uniqueness, caps, convergence

/// Runs one command; args exclude the program name. Results go to `out` (or
/// the --output file), errors to `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multipath::cli
