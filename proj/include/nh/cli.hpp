#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nh {

inline constexpr const char* engine_version = "nh 1.0.0";

enum exit_code : int {
    exit_ok = 0,
    exit_input_error = 1,
    exit_internal = 2,
    exit_unbounded = 3,
};

/// Runs one command line (without the program name) and returns its exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nh
