#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "frodo/layer.hpp"
#include "frodo/scoring.hpp"

namespace frodo::cli {

/// Settings shared by the pipeline commands. Each command reads the subset
/// it needs; validate() checks the ranges every command relies on.
struct RunConfig {
  double lambda = kDefaultShrinkage;
  std::vector<Layer> layers;  // empty: command default
  FusionRule fusion_rule = FusionRule::single(Layer::L3);
  double sensitivity_target = 0.99;

  std::filesystem::path manifest;
  std::filesystem::path stats_dir;
  std::filesystem::path calib;      // score: input calibration; fit: output when set
  std::filesystem::path scores;     // score: output CSV; eval/calibrate: input CSV
  std::filesystem::path report;     // eval: output JSON; calibrate: optional JSON to update
  std::filesystem::path roc_dir;

  void validate() const;
};

/// Fits one LayerStats per layer over the manifest's `in` rows and writes the
/// bundle to stats_dir. Writes a sum_z calibration file when calib is set.
StatsBundle cmd_fit(const RunConfig& config, std::ostream& log);

/// Scores every manifest row. All rows are attempted; if any fail, each
/// failure is listed and the first one is rethrown and nothing is written.
void cmd_score(const RunConfig& config, std::ostream& log);

void cmd_eval(const RunConfig& config, std::ostream& log);

void cmd_calibrate(const RunConfig& config, std::ostream& log);

/// Path of the JSON sidecar written next to a scores CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& scores_csv);

/// Entry point: parses arguments, dispatches, and maps failures to exit
/// codes (0 ok, 2 validation, 3 numerical, 4 I/O).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frodo::cli
