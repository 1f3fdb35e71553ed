#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ovtk::cli {

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default --config file.
inline constexpr const char* kConfigEnv = "OVTK_CONFIG";

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ovtk::cli
