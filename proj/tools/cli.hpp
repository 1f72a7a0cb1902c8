#pragma once

#include <string>
#include <vector>

namespace fruitsynth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace fruitsynth::cli
