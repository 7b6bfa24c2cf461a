#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wva/error.hpp"

namespace wva::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kUnknownFlag = 3,
  kAmbiguousUnit = 4,
  kConflictingOptions = 5,
  kIoError = 6,
  kInvalidInput = 7,
  kInvalidArgument = 8,
  kEnergyBelowFloor = 10,
  kDenominatorBelowFloor = 11,
  kInfeasibleBudget = 12,
  kAllSamplesSingular = 13,
  kDegenerateBracket = 14,
  kNonlinearRegime = 15,
};

int exit_code_for(ErrorKind kind);

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

enum class Command { Simulate, Sweep, Fit, MonteCarlo, Regimes };
std::string to_string(Command c);

enum class DelaySource { None, Femtoseconds, Attoseconds, ArmLengths };

struct RunConfig {
  Command command = Command::Sweep;

  // Pulse: Gaussian (tau + nu0) or a measured spectrum file.
  std::optional<double> tau_fs;
  std::optional<double> nu0_thz;
  std::optional<std::string> spectrum_file;
  std::string spectrum_column = "density";
  std::optional<std::size_t> grid_count;
  bool numeric = false;  // evaluate Gaussian pulses on a grid instead of in closed form

  DelaySource delay_source = DelaySource::None;
  double delay_1_fs = 0.0;
  double delay_2_fs = 0.0;

  std::optional<double> gamma_rad;
  double gamma_min_rad = -3.141592653589793;
  double gamma_max_rad = 3.141592653589793;
  std::optional<std::size_t> gamma_steps;

  double jitter_rad = 0.0;
  double resolution_nm = 0.0;
  int scans = 1;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double floor = 1e-12;

  double budget_db = 12.0;
  double threshold_db = 12.0;

  std::optional<std::string> data_file;
  double t_min_fs = 0.0;
  double t_max_fs = 200.0;
  bool fit_gamma_offset = false;
  std::size_t fit_grid_nodes = 512;
  std::size_t refits = 0;

  std::filesystem::path out_dir = ".";
  bool svg = false;

  double delay_fs() const noexcept { return delay_1_fs - delay_2_fs; }
  nlohmann::json to_json() const;
};

/// Parses command-line arguments (without the program name). A `--config`
/// file of `key = value` lines supplies defaults for the same keys; explicit
/// flags win. Throws CliError carrying the exit code.
RunConfig parse_config(const std::vector<std::string>& args);

struct RunReport {
  nlohmann::json json;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> warnings;
};

/// Executes the command and writes its outputs. On failure every file written
/// so far is removed and the error is rethrown.
RunReport run(const RunConfig& config);

/// Full front end: parse, run, report. Returns the process exit code.
int main_entry(const std::vector<std::string>& args);

}  // namespace wva::cli
