#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stackrl::cli {

// Exit codes: 0 success, 1 usage error, 2 runtime error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// args excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stackrl::cli
