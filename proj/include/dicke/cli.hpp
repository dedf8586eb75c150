#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dicke {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitResource = 4,
};

/// Default output root when --out is absent and the config has no output directory.
inline constexpr const char* kOutRootEnv = "DICKE_OUT_ROOT";

struct CommandOptions {
  std::string command;  // evolve | open | sweep | wigner | kicks | gs
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;  // 0 = hardware concurrency
  bool overwrite = false;
  bool quiet = false;
};

struct CommandResult {
  std::filesystem::path directory;
  std::vector<std::string> files;
};

/// Runs one subcommand and writes its artifacts. Throws dicke::Error subclasses.
CommandResult run_command(const CommandOptions& options);

/// Full command line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

/// Formats x with 17 significant digits.
std::string format_number(double x);

}  // namespace dicke
