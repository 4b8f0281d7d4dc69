// Command implementations behind the depctl executable. Each command returns
// its artifacts as strings so that callers decide where they go.
#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace depctl {

struct CommandOptions {
  std::string config_path;
  std::string config_text;  // used when config_path is empty
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<double> theta;
  std::vector<double> levels;
  std::string mode = "delay";  // bounds: delay | backlog | horizon | dcc
  double y = 2.0;
  double epsilon = 1e-3;
  int decimals = -1;  // < 0: 17 significant digits
  std::string pmf_x, pmf_y;
  std::string samples_x, samples_y;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> files;  // (file name, contents)
  std::string message;                                      // diagnostics for stderr
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitUnstable = 4;
inline constexpr int kExitCopula = 5;

// command: spectral | bounds | control | simulate | ordercheck. Never throws;
// failures are mapped onto the exit-code taxonomy.
CommandResult run_command(const std::string& command, const CommandOptions& options);

// Exit code and message for an exception raised by the library.
std::pair<int, std::string> classify_error(const std::exception& e);

}  // namespace depctl
