#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vx::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericError = 3;

// Runs one subcommand. argv[0] is the program name.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vx::cli
