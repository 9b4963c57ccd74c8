#ifndef MEDXAI_CLI_HPP
#define MEDXAI_CLI_HPP

#include <iosfwd>

namespace medxai {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Entry point of the command-line tool. Subcommands: make-synthetic, train,
// evaluate, explain, predict. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace medxai

#endif  // MEDXAI_CLI_HPP
