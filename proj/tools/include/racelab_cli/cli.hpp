#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace racelab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;  ///< failed validation, bad input file, runtime error
inline constexpr int exit_usage = 2;

/// Runs one `race-lab` command line (without the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace racelab::cli
