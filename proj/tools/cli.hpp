#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace jsccf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Parses `args` (without the program name) and runs one subcommand:
// train, eval, varrate, broadcast, stats, plot or region.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jsccf::cli
