#pragma once

// Operator surface: run configuration, command implementations and the
// argument parser behind the `proa` executable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proa/perturb.hpp"
#include "proa/verifier.hpp"

namespace proa::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kModelError = 3,
  kDatasetError = 4,
};

struct RunConfig {
  std::string model;  // .nnw path, tcp://host:port, stdio:<cmd> or "external"
  std::filesystem::path dataset;
  std::string perturbation = "rotation";
  std::optional<std::vector<perturb::ParamRange>> box;  // overrides the preset
  perturb::BoxPreset preset = perturb::BoxPreset::Standard;
  VerifyConfig verify;
  std::size_t ac_n = 1000;        // 0 disables the Agresti-Coull baseline
  std::size_t grid_points = 21;   // 0 disables Grid
  std::size_t rand_n = 100;       // 0 disables Random
  std::size_t workers = 1;
  std::filesystem::path out = "proa-out";
  bool timing = false;  // fill the wall_time column

  /// Throws ConfigError on anything unusable.
  perturb::PerturbationSpec perturbation_spec() const;
};

/// Parses "lo:hi[,lo:hi]".
std::vector<perturb::ParamRange> parse_box(const std::string& text);

/// Flat "key=value" file; '#' starts a comment. Keys are long flag names
/// without dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Writes <out>/certify.csv and <out>/certify_summary.json.
int cmd_certify(const RunConfig& config, std::ostream& log);

/// Writes <out>/baseline_<method>.csv per enabled method and
/// <out>/baseline_summary.json with one section per method.
int cmd_baseline(const RunConfig& config, std::ostream& log);

/// Prints model and (when given) dataset metadata.
int cmd_inspect(const RunConfig& config, std::ostream& out);

/// Full command line entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace proa::cli
