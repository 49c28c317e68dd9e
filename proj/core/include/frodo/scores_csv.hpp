#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frodo/layer.hpp"
#include "frodo/manifest.hpp"

namespace frodo {

inline constexpr std::string_view kScoresHeader = "sample_id,label,L1,L2,L3,L4,L5,fused,baseline";

struct ScoreRow {
  std::string sample_id;
  SampleLabel label = SampleLabel::Unlabeled;
  std::map<Layer, double> per_layer;
  std::optional<double> fused;
  std::optional<double> baseline;
};

/// Shortest decimal text that parses back to the same double; "inf"/"-inf"
/// for infinities.
std::string format_number(double value);

/// Strict parse of a full token; throws MalformedRow on junk.
double parse_number(std::string_view token);

void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path);
std::vector<ScoreRow> parse_scores_csv(std::string_view text);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

/// Scores column named `method` ("L1".."L5", "fused" or "baseline") for a
/// row, if present.
std::optional<double> score_column(const ScoreRow& row, std::string_view method);

/// Method names in canonical column order.
std::vector<std::string> score_methods();

}  // namespace frodo
