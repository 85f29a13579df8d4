#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slam3d {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitUsage = 64;

/// args excludes the program name: {"eval", "--gt", ...}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slam3d
