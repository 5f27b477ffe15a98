#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gifsim/config.hpp"

namespace gifsim {

inline constexpr const char* kVersion = "0.1.0";

struct RunOutcome {
  std::vector<std::filesystem::path> files;  // relative to the output directory
  std::vector<std::string> warnings;
};

/// Executes the configured pipeline and writes series.csv, spectrum.csv (grid
/// runs), wigner_*.txt (when run.wigner_times is set) and metadata.json into
/// `out_dir`. On a numerical abort the metadata records the failed invariant
/// before the NumericalError propagates.
RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir);

/// Units table (quantity, value, unit) for the [units] section.
std::vector<std::vector<std::string>> units_table(const RunConfig& config);

}  // namespace gifsim
