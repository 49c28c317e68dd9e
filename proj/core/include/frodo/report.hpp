#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "frodo/evaluation.hpp"

namespace frodo {

struct OperatingPoint {
  double threshold;
  double sensitivity_target;
  Confusion confusion;
};

struct ReportConfig {
  std::string scores_path;
  double sensitivity_target = 0.99;
  std::string fusion_rule;  // empty when unknown
};

/// Writes the JSON report and, if roc_dir is non-empty, one
/// roc_<method>.csv per method with `fpr,tpr,threshold` rows. Output is a
/// pure function of the arguments. Returns the CSV paths written.
std::vector<std::filesystem::path> emit_report(
    const std::map<std::string, RocResult>& per_method,
    const std::map<std::string, OperatingPoint>& operating_points, const ReportConfig& config,
    const std::filesystem::path& report_path, const std::filesystem::path& roc_dir);

void write_roc_csv(const RocResult& roc, const std::filesystem::path& path);

/// Merges operating points into an existing report (replacing entries of the
/// same name) or creates a minimal report if the file does not exist.
void append_operating_points(const std::filesystem::path& report_path,
                             const std::map<std::string, OperatingPoint>& operating_points);

}  // namespace frodo
