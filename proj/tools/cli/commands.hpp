#pragma once

#include "config.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace gradwave::cli {

/// Exit codes. Bad input (malformed files, bad flags, invalid values) is 2.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kBadInput = 2,
  kNumeric = 3,
  kInfeasible = 4,
};

/// Raised when the constraints cannot be met (projection did not reach the tolerances).
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collects a command's outputs in memory and writes them only once the command succeeded,
/// each atomically and with a `<file>.meta.json` sidecar.
class OutputSet {
 public:
  OutputSet(const RunConfig& cfg, std::string command);
  void add(const std::string& name, std::string content);
  /// Writes everything; returns the written paths.
  std::vector<std::filesystem::path> commit() const;

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Full command line entry point; returns the process exit code. Errors are reported on
/// stderr as one line: `gradwave-error {"code":..,"exit":..,"message":..}`.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace gradwave::cli
