#pragma once

#include "empmin/config.hpp"
#include "empmin/experiments.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace empmin::cli {

inline constexpr const char* kToolName = "empmin";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config_error = 1, exit_failed = 2 };

struct RunOptions {
  std::size_t jobs = 1;
  std::string out_dir = ".";
  /// replaces master_seed when set (EMPMIN_SEED)
  std::optional<std::uint64_t> seed_override;
  /// progress and error messages; nullptr silences them
  std::ostream* log = nullptr;
};

/// Build the experiment problem described by the [problem] block.
experiments::Problem build_problem(const ProblemConfig& config);

/// The optimizer settings actually used: the network family has no Hessian,
/// so a default Newton method becomes gradient descent.
optim::MinimizeOptions effective_optimizer(const RunConfig& config);

/// In-memory artifacts of a successful or failed command.
struct Artifacts {
  int exit_code = exit_ok;
  std::string csv;
  std::string json;
  std::string message;  // reason for a nonzero exit code
};

/// Execute a command without touching the file system.
Artifacts execute(const RunConfig& config, const RunOptions& options);

/// execute() and then write both artifacts under out_dir. On a nonzero exit
/// code nothing is written and stale files of the same names are removed.
int run(const RunConfig& config, const RunOptions& options);

/// Escape a field for CSV output (quotes when it holds ',', '"' or a newline).
std::string csv_field(const std::string& s);

}  // namespace empmin::cli
