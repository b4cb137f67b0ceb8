#pragma once

// Command-line front end:
//   torusconj <command> <spec.map> [--trunc N] [--grid R] [--alpha LIST] [--K X]
//             [--tol T] [--sublattice FILE|full] [--seed S] [--format csv|json] [-o DIR]
// Exit codes: 0 all checks pass, 2 a verification verdict failed, 1 operational error.

#include <iosfwd>

namespace torusconj::cli {

inline constexpr int exit_pass = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_verdict_fail = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace torusconj::cli
