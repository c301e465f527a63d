#pragma once

// Command-line front end: run-estimate, validate, sweep and bench-sim.

#include <iosfwd>
#include <string>
#include <vector>

namespace permcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< failed checks or computation errors
inline constexpr int kExitInput = 2;    ///< bad arguments or input files

/// Runs the CLI on `args` (without the program name). Reports go to `out`
/// unless --out is given; diagnostics and error records go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permcap::cli
