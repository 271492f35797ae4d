#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. args excludes the program name. Usage errors
// (unknown flag or subcommand, bad flag value) return kExitUsage; pipeline
// errors print "error: <code>: <message>" and return kExitFailure.
//
// Option precedence, lowest first: built-in default, --config file,
// RLAB_SEED (seed only), command-line flag.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rlab::cli
