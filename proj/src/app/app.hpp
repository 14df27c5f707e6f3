#pragma once

namespace uowq::app {

// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
// 4 a verification verdict failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerification = 4;

int run(int argc, char** argv);

}  // namespace uowq::app
