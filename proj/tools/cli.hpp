#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cavcool::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "CAVCOOL_OUT_DIR";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSimulation = 3;

// Entry point shared by the executable and the tests. args[0] is the program
// name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavcool::cli
