#pragma once

namespace cate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPartial = 3;

// Entry point of the catebench tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace cate::cli
