#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nclab {

// Exit codes shared by the library-level runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNonConverged = 3;

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A validated experiment configuration: one of the five kinds plus its
// parameters, already checked against the target module's preconditions.
// `grid` lists parameter values to sweep; empty means a single run.
struct ExperimentConfig {
  std::string kind;
  nlohmann::json params;  // flat object; defaults are filled at run time
  std::map<std::string, std::vector<nlohmann::json>> grid;
  std::string out = "out";  // default output directory; the CLI flag wins
};

// Parses and validates; throws ConfigError on unknown kind, unknown keys,
// missing required keys or out-of-range values. No files are touched here.
ExperimentConfig parse_config(const nlohmann::json& config);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Runs one experiment cell and writes results.csv + report.json (and plot.svg
// when requested) into out_dir. Returns kExitOk or kExitNonConverged.
int run_single_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir, bool plot);

// Full runner: expands the grid into subdirectories (cell parameters baked
// into the name), running cells in parallel up to COLLAPSE_LAB_THREADS.
// Returns the worst exit code across cells.
int run_experiment(const ExperimentConfig& config,
                   const std::filesystem::path& out_dir, bool plot);

// One line of a verification suite.
struct CheckResult {
  std::string name;
  bool pass;
  double measured;
  double tolerance;
};

// suite is one of: oracle, hessian, collapse, penultimate, ode, margin, all.
// Throws ConfigError for anything else.
std::vector<CheckResult> verify_suite(const std::string& suite);

// Prints one PASS/FAIL line per check; returns kExitOk iff all pass.
int run_verify(const std::string& suite, std::ostream& out);

}  // namespace nclab
