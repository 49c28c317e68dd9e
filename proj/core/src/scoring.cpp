#include "frodo/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "frodo/error.hpp"

namespace frodo {

FusionRule parse_fusion_rule(std::string_view text) {
  if (text == "sum_raw") return FusionRule::sum_raw();
  if (text == "sum_z") return FusionRule::sum_z();
  constexpr std::string_view prefix = "single:";
  if (text.starts_with(prefix)) {
    if (const auto layer = parse_layer(text.substr(prefix.size()))) return FusionRule::single(*layer);
  }
  fail(ErrorCode::InvalidArgument,
       "unknown fusion rule '" + std::string(text) + "' (want single:L1..L5, sum_raw or sum_z)");
}

std::string to_string(const FusionRule& rule) {
  switch (rule.kind) {
    case FusionRule::Kind::Single: return "single:" + std::string(layer_name(rule.layer));
    case FusionRule::Kind::SumRaw: return "sum_raw";
    case FusionRule::Kind::SumZ: return "sum_z";
  }
  return "unknown";
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::InsufficientSamples, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

CalibrationStats fit_calibration(const std::map<Layer, std::vector<double>>& distances) {
  CalibrationStats calib;
  for (const auto& [layer, values] : distances) {
    if (values.empty()) {
      fail(ErrorCode::InsufficientSamples,
           "no calibration distances for layer " + std::string(layer_name(layer)));
    }
    const double location = median(values);
    std::vector<double> deviations(values.size());
    std::transform(values.begin(), values.end(), deviations.begin(),
                   [location](double v) { return std::abs(v - location); });
    const double scale = median(std::move(deviations));
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      fail(ErrorCode::BadCalibration,
           "layer " + std::string(layer_name(layer)) + " has zero median absolute deviation");
    }
    calib.per_layer.emplace(layer, RobustScale{location, scale});
  }
  return calib;
}

void write_calibration(const CalibrationStats& calib, const std::filesystem::path& path,
                       const std::string& provenance) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["provenance"] = provenance;
  doc["layers"] = nlohmann::ordered_json::object();
  for (const auto& [layer, rs] : calib.per_layer) {
    doc["layers"][std::string(layer_name(layer))] = {{"location", rs.location},
                                                      {"scale", rs.scale}};
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

CalibrationStats read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open calibration " + path.string());
  CalibrationStats calib;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& [name, entry] : doc.at("layers").items()) {
      const auto layer = parse_layer(name);
      if (!layer) fail(ErrorCode::FormatError, path.string() + ": unknown layer " + name);
      const RobustScale rs{entry.at("location").get<double>(), entry.at("scale").get<double>()};
      if (!(rs.scale > 0.0) || !std::isfinite(rs.scale) || !std::isfinite(rs.location)) {
        fail(ErrorCode::BadCalibration, path.string() + ": layer " + name + " has invalid scale");
      }
      calib.per_layer.emplace(*layer, rs);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return calib;
}

FrodoScore score_sample(std::string sample_id, const StatsBundle& stats,
                        const std::map<Layer, PooledFeature>& features, const FusionRule& rule,
                        const CalibrationStats* calib) {
  FrodoScore score;
  score.sample_id = std::move(sample_id);
  for (const auto& [layer, feature] : features) {
    const auto it = stats.find(layer);
    if (it == stats.end()) {
      fail(ErrorCode::MissingStats, "no fitted stats for layer " + std::string(layer_name(layer)));
    }
    score.per_layer.emplace(layer, mahalanobis_sq(it->second, feature));
  }

  switch (rule.kind) {
    case FusionRule::Kind::Single: {
      const auto it = score.per_layer.find(rule.layer);
      if (it == score.per_layer.end()) {
        fail(ErrorCode::ShapeError, "fusion layer " + std::string(layer_name(rule.layer)) +
                                        " was not scored for sample '" + score.sample_id + "'");
      }
      score.fused = it->second;
      break;
    }
    case FusionRule::Kind::SumRaw: {
      double sum = 0.0;
      for (const auto& [layer, d] : score.per_layer) sum += d;
      score.fused = sum;
      break;
    }
    case FusionRule::Kind::SumZ: {
      if (calib == nullptr) fail(ErrorCode::MissingCalibration, "sum_z fusion needs calibration");
      double sum = 0.0;
      for (const auto& [layer, d] : score.per_layer) {
        const auto it = calib->per_layer.find(layer);
        if (it == calib->per_layer.end()) {
          fail(ErrorCode::MissingCalibration,
               "no calibration for layer " + std::string(layer_name(layer)));
        }
        sum += (d - it->second.location) / it->second.scale;
      }
      score.fused = sum;
      break;
    }
  }
  score.fusion_rule = rule;
  return score;
}

namespace {

template <typename T>
double baseline_msp_impl(std::span<const T> probs) {
  if (probs.size() < 2) {
    fail(ErrorCode::ShapeError, "probability vector needs at least 2 entries");
  }
  double sum = 0.0;
  double top = 0.0;
  for (T p : probs) {
    const double v = static_cast<double>(p);
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorCode::NotAProbabilityVector, "entry outside [0, 1]");
    }
    sum += v;
    top = std::max(top, v);
  }
  if (!(std::abs(sum - 1.0) <= 1e-3)) {
    fail(ErrorCode::NotAProbabilityVector, "entries sum to " + std::to_string(sum));
  }
  return 1.0 - top;
}

}  // namespace

double baseline_msp(std::span<const double> probs) { return baseline_msp_impl(probs); }
double baseline_msp(std::span<const float> probs) { return baseline_msp_impl(probs); }

}  // namespace frodo
