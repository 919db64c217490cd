#pragma once

#include <string>
#include <vector>

namespace laps::cli {

/// Entry point shared by the `laps` binary and in-process tests.
/// args excludes the program name. Exit codes: 0 success, 2 configuration or
/// input errors, 3 step-size bracketing failure, 1 other runtime failures.
int run(const std::vector<std::string>& args);

}  // namespace laps::cli
