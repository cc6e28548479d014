#pragma once

// Subcommand front end shared by tools/corn and the acceptance harness.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace corn::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolations = 1;  // validate found problems
inline constexpr int kUsage = 2;       // bad flags, unreadable or malformed inputs
inline constexpr int kInfeasible = 3;
inline constexpr int kTimedOut = 4;    // a limit stopped the solver; best incumbent written if any
inline constexpr int kFailure = 5;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace corn::cli
