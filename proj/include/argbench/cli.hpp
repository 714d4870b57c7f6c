#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace argbench::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,      // bad flags or config values
  kEnvironment = 3,  // missing files, unwritable paths
  kIntegrity = 4,  // inputs that do not agree with each other
};

// Runs one `argbench <verb> ...` invocation. args excludes the program name.
// Verbs: generate, evaluate, score, report, hard-subset, label.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace argbench::cli
