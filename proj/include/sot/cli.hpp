#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace sot {

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitRuntimeError = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace sot
