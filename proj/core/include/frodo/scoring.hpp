#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frodo/gaussian_stats.hpp"
#include "frodo/stats_bundle.hpp"

namespace frodo {

/// How per-layer distances combine into one score. single(L) is the method
/// as published; sum_raw and sum_z are extensions.
struct FusionRule {
  enum class Kind { Single, SumRaw, SumZ };

  Kind kind = Kind::Single;
  Layer layer = Layer::L3;  // used by Single only

  static FusionRule single(Layer layer) { return {Kind::Single, layer}; }
  static FusionRule sum_raw() { return {Kind::SumRaw, Layer::L3}; }
  static FusionRule sum_z() { return {Kind::SumZ, Layer::L3}; }

  friend bool operator==(const FusionRule& a, const FusionRule& b) {
    return a.kind == b.kind && (a.kind != Kind::Single || a.layer == b.layer);
  }
};

/// Parses "single:L3", "sum_raw" or "sum_z".
FusionRule parse_fusion_rule(std::string_view text);
std::string to_string(const FusionRule& rule);

struct RobustScale {
  double location;  // median
  double scale;     // median absolute deviation, > 0
};

/// Per-layer location/scale of in-distribution distances, used by sum_z.
struct CalibrationStats {
  std::map<Layer, RobustScale> per_layer;
};

double median(std::vector<double> values);

/// Median and raw (unscaled) MAD of each layer's distances. Throws
/// InsufficientSamples on an empty layer, BadCalibration if MAD is zero.
CalibrationStats fit_calibration(const std::map<Layer, std::vector<double>>& distances);

void write_calibration(const CalibrationStats& calib, const std::filesystem::path& path,
                       const std::string& provenance);
CalibrationStats read_calibration(const std::filesystem::path& path);

struct FrodoScore {
  std::string sample_id;
  std::map<Layer, double> per_layer;
  std::optional<double> fused;
  std::optional<FusionRule> fusion_rule;
};

/// Scores one sample on every layer present in `features`.
///
/// Throws MissingStats if a feature layer has no stats, MissingCalibration if
/// sum_z lacks calibration for a scored layer, ShapeError if single(L) names
/// a layer that was not scored.
FrodoScore score_sample(std::string sample_id, const StatsBundle& stats,
                        const std::map<Layer, PooledFeature>& features, const FusionRule& rule,
                        const CalibrationStats* calib = nullptr);

/// Max-softmax baseline oriented so that larger means more out-of-
/// distribution: 1 - max(probs).
double baseline_msp(std::span<const double> probs);
double baseline_msp(std::span<const float> probs);

}  // namespace frodo
