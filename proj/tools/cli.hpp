#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace planwarp::cli {

/// Exit codes: 0 success, 1 I/O or parse failure, 2 validation or mapping
/// failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace planwarp::cli
