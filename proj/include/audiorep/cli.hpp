#pragma once

#include <iosfwd>

namespace audiorep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the audiorep command line tool. Reports go to `out` (or to
// --out files), logs to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace audiorep
