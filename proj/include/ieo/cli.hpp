#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ieo::cli {

inline constexpr const char* kToolVersion = "0.1.0";
/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "IEO_OUTPUT_DIR";

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace ieo::cli
