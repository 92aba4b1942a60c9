#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opshrink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitConfig = 3;

/// Runs one invocation. args excludes the program name. Never throws;
/// failures map to the exit-code contract above with a message on err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands "--config FILE" into flags: each non-blank, non-# line of FILE is
/// key=value and becomes --key=value (true/false values toggle flags).
/// Config-derived flags come first so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

} // namespace opshrink::cli
