#include "frodo/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "frodo/error.hpp"
#include "frodo/evaluation.hpp"
#include "frodo/gaussian_stats.hpp"
#include "frodo/manifest.hpp"
#include "frodo/parallel.hpp"
#include "frodo/report.hpp"
#include "frodo/scores_csv.hpp"
#include "frodo/stats_bundle.hpp"
#include "frodo/tensor_io.hpp"

namespace frodo::cli {

namespace {

constexpr std::size_t kFitChunk = 256;

[[noreturn]] void rethrow_for_sample(const Error& e, const std::string& sample_id) {
  throw Error(e.code(), "sample '" + sample_id + "': " + e.what());
}

PooledFeature load_pooled(const Manifest& manifest, const ManifestRecord& record, Layer layer) {
  const auto it = record.tensor_paths.find(layer);
  if (it == record.tensor_paths.end()) {
    fail(ErrorCode::MalformedRow, "no " + std::string(layer_name(layer)) + " tensor listed");
  }
  return pool_spatial(read_tensor(manifest.resolve(it->second)), layer);
}

std::vector<const ManifestRecord*> in_rows(const Manifest& manifest) {
  std::vector<const ManifestRecord*> rows;
  for (const auto& record : manifest.records) {
    if (record.label == SampleLabel::In) rows.push_back(&record);
  }
  return rows;
}

std::vector<LabeledScore> labeled_column(const std::vector<ScoreRow>& rows,
                                         const std::string& method) {
  std::vector<LabeledScore> out;
  for (const auto& row : rows) {
    if (row.label == SampleLabel::Unlabeled) continue;
    if (const auto v = score_column(row, method)) {
      out.push_back({row.sample_id, *v,
                     row.label == SampleLabel::Ood ? BinaryLabel::Ood : BinaryLabel::In});
    }
  }
  return out;
}

std::vector<double> ood_values(const std::vector<LabeledScore>& scores) {
  std::vector<double> out;
  for (const auto& s : scores) {
    if (s.label == BinaryLabel::Ood) out.push_back(s.score);
  }
  return out;
}

std::string read_fusion_from_sidecar(const std::filesystem::path& scores_csv) {
  std::ifstream in(sidecar_path(scores_csv), std::ios::binary);
  if (!in) return {};
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.value("fusion_rule", std::string{});
  } catch (const nlohmann::json::exception&) {
    return {};
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "--lambda must lie in [0, 1]");
  }
  if (!(sensitivity_target > 0.0 && sensitivity_target <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "--sensitivity must lie in (0, 1]");
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& scores_csv) {
  return std::filesystem::path(scores_csv.string() + ".json");
}

StatsBundle cmd_fit(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::vector<Layer> layers =
      config.layers.empty() ? std::vector<Layer>(kAllLayers.begin(), kAllLayers.end())
                            : config.layers;
  const Manifest manifest = read_manifest(config.manifest);
  const auto rows = in_rows(manifest);
  if (rows.size() < 2) {
    fail(ErrorCode::InsufficientSamples, "manifest has " + std::to_string(rows.size()) +
                                             " rows labeled in; fitting needs at least 2");
  }

  std::vector<LayerFitter> fitters;
  for (Layer layer : layers) fitters.emplace_back(layer);

  // Load and pool a chunk in parallel, then fold it in manifest order.
  const std::size_t threads = configured_threads();
  std::vector<std::vector<PooledFeature>> chunk;
  for (std::size_t begin = 0; begin < rows.size(); begin += kFitChunk) {
    const std::size_t end = std::min(rows.size(), begin + kFitChunk);
    chunk.assign(end - begin, {});
    parallel_for(end - begin, threads, [&](std::size_t i) {
      const ManifestRecord& record = *rows[begin + i];
      try {
        for (Layer layer : layers) chunk[i].push_back(load_pooled(manifest, record, layer));
      } catch (const Error& e) {
        rethrow_for_sample(e, record.sample_id);
      }
    });
    for (auto& features : chunk) {
      for (std::size_t l = 0; l < layers.size(); ++l) fitters[l].push(features[l]);
    }
  }

  StatsBundle fitted;
  for (const auto& fitter : fitters) {
    fitted.emplace(fitter.layer(), fitter.finish(config.lambda));
  }
  StatsBundle persisted = write_stats_bundle(fitted, config.stats_dir);
  for (const auto& [layer, stats] : persisted) {
    log << layer_name(layer) << ": n=" << stats.gaussian.count() << " d=" << stats.gaussian.dim()
        << " lambda=" << format_number(stats.gaussian.lambda())
        << " jitter_used=" << format_number(stats.gaussian.jitter_used()) << '\n';
  }

  if (!config.calib.empty()) {
    std::map<Layer, std::vector<double>> distances;
    for (Layer layer : layers) distances[layer].resize(rows.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
      const ManifestRecord& record = *rows[i];
      try {
        for (Layer layer : layers) {
          distances[layer][i] = mahalanobis_sq(persisted.at(layer), load_pooled(manifest, record, layer));
        }
      } catch (const Error& e) {
        rethrow_for_sample(e, record.sample_id);
      }
    });
    write_calibration(fit_calibration(distances), config.calib,
                      "in-labeled rows of " + config.manifest.generic_string());
    log << "calibration: " << config.calib.generic_string() << '\n';
  }
  return persisted;
}

void cmd_score(const RunConfig& config, std::ostream& log) {
  config.validate();
  const StatsBundle bundle = read_stats_bundle(config.stats_dir);
  std::vector<Layer> layers = config.layers;
  if (layers.empty()) {
    for (const auto& [layer, stats] : bundle) layers.push_back(layer);
  }
  for (Layer layer : layers) {
    if (!bundle.contains(layer)) {
      fail(ErrorCode::MissingStats, "bundle " + config.stats_dir.generic_string() + " has no " +
                                        std::string(layer_name(layer)) + " stats");
    }
  }

  std::optional<CalibrationStats> calib;
  if (!config.calib.empty()) calib = read_calibration(config.calib);
  if (config.fusion_rule.kind == FusionRule::Kind::SumZ && !calib) {
    fail(ErrorCode::MissingCalibration, "--fusion sum_z requires --calib");
  }
  if (config.fusion_rule.kind == FusionRule::Kind::Single &&
      std::find(layers.begin(), layers.end(), config.fusion_rule.layer) == layers.end()) {
    fail(ErrorCode::MissingStats, "fusion layer " +
                                      std::string(layer_name(config.fusion_rule.layer)) +
                                      " is not among the scored layers");
  }

  const Manifest manifest = read_manifest(config.manifest);
  const std::size_t n = manifest.records.size();
  std::vector<ScoreRow> rows(n);
  std::vector<std::optional<Error>> failures(n);

  parallel_for(n, configured_threads(), [&](std::size_t i) {
    const ManifestRecord& record = manifest.records[i];
    try {
      std::map<Layer, PooledFeature> features;
      for (Layer layer : layers) features.emplace(layer, load_pooled(manifest, record, layer));
      FrodoScore score = score_sample(record.sample_id, bundle, features, config.fusion_rule,
                                      calib ? &*calib : nullptr);
      ScoreRow& row = rows[i];
      row.sample_id = record.sample_id;
      row.label = record.label;
      row.per_layer = std::move(score.per_layer);
      row.fused = score.fused;
      if (record.softmax_path) {
        row.baseline = baseline_msp(read_tensor(manifest.resolve(*record.softmax_path)).data());
      }
    } catch (const Error& e) {
      failures[i] = Error(e.code(), "sample '" + record.sample_id + "': " + e.what());
    }
  });

  const Error* first = nullptr;
  std::size_t failed = 0;
  std::string failed_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    log << "error: " << failures[i]->what() << '\n';
    if (first == nullptr) first = &*failures[i];
    failed_ids += (failed++ == 0 ? "" : ", ") + manifest.records[i].sample_id;
  }
  if (first != nullptr) {
    throw Error(first->code(), std::to_string(failed) + " of " + std::to_string(n) +
                                   " samples failed (" + failed_ids + "); no scores written");
  }

  write_scores_csv(rows, config.scores);

  nlohmann::ordered_json sidecar;
  sidecar["fusion_rule"] = to_string(config.fusion_rule);
  sidecar["layers"] = nlohmann::ordered_json::array();
  for (Layer layer : layers) sidecar["layers"].push_back(std::string(layer_name(layer)));
  sidecar["score_units"] = "squared_mahalanobis";
  sidecar["baseline"] = "1 - max(softmax)";
  sidecar["stats_dir"] = config.stats_dir.generic_string();
  sidecar["lambda"] = nlohmann::ordered_json::object();
  sidecar["jitter_used"] = nlohmann::ordered_json::object();
  for (Layer layer : layers) {
    const auto& g = bundle.at(layer).gaussian;
    sidecar["lambda"][std::string(layer_name(layer))] = g.lambda();
    sidecar["jitter_used"][std::string(layer_name(layer))] = g.jitter_used();
  }
  if (calib) {
    sidecar["calibration"]["path"] = config.calib.generic_string();
    for (const auto& [layer, rs] : calib->per_layer) {
      sidecar["calibration"]["layers"][std::string(layer_name(layer))] = {
          {"location", rs.location}, {"scale", rs.scale}};
    }
  } else {
    sidecar["calibration"] = nullptr;
  }
  const auto side = sidecar_path(config.scores);
  std::ofstream out(side, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + side.string() + " for writing");
  out << sidecar.dump(2) << '\n';
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + side.string());

  log << "scored " << n << " samples (" << to_string(config.fusion_rule) << ") -> "
      << config.scores.generic_string() << '\n';
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto rows = read_scores_csv(config.scores);

  std::map<std::string, RocResult> per_method;
  std::map<std::string, OperatingPoint> operating_points;
  for (const auto& method : score_methods()) {
    const auto scores = labeled_column(rows, method);
    if (scores.empty()) continue;
    RocResult roc;
    try {
      roc = roc_auc(scores);
    } catch (const Error& e) {
      throw Error(e.code(), "method " + method + ": " + e.what());
    }
    const double threshold = threshold_at_sensitivity(ood_values(scores), config.sensitivity_target);
    operating_points.emplace(
        method, OperatingPoint{threshold, config.sensitivity_target, confusion_at(scores, threshold)});
    per_method.emplace(method, std::move(roc));
  }
  if (per_method.empty()) {
    fail(ErrorCode::DegenerateLabels, config.scores.generic_string() + " has no labeled scores");
  }

  ReportConfig report_config;
  report_config.scores_path = config.scores.generic_string();
  report_config.sensitivity_target = config.sensitivity_target;
  report_config.fusion_rule = read_fusion_from_sidecar(config.scores);

  std::filesystem::path roc_dir = config.roc_dir;
  if (roc_dir.empty()) {
    roc_dir = config.report.parent_path().empty() ? std::filesystem::path(".")
                                                  : config.report.parent_path();
  }
  emit_report(per_method, operating_points, report_config, config.report, roc_dir);

  for (const auto& [method, roc] : per_method) {
    const auto& op = operating_points.at(method);
    log << method << ": auc=" << format_number(roc.auc) << " n_in=" << roc.n_in
        << " n_ood=" << roc.n_ood << " threshold@" << format_number(config.sensitivity_target)
        << "=" << format_number(op.threshold) << '\n';
  }
}

void cmd_calibrate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto rows = read_scores_csv(config.scores);
  std::map<std::string, OperatingPoint> operating_points;
  for (const auto& method : score_methods()) {
    const auto scores = labeled_column(rows, method);
    const auto ood = ood_values(scores);
    if (ood.empty()) continue;
    const double threshold = threshold_at_sensitivity(ood, config.sensitivity_target);
    operating_points.emplace(
        method, OperatingPoint{threshold, config.sensitivity_target, confusion_at(scores, threshold)});
    log << method << ": threshold=" << format_number(threshold)
        << " recall=" << format_number(recall_at(ood, threshold)) << '\n';
  }
  if (operating_points.empty()) {
    fail(ErrorCode::DegenerateLabels, config.scores.generic_string() + " has no ood rows");
  }
  if (!config.report.empty()) append_operating_points(config.report, operating_points);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Out-of-distribution detection from feature-activation statistics"};
  app.require_subcommand(1);

  RunConfig config;
  std::string layers_text;
  std::string fusion_text = "single:L3";

  auto* fit = app.add_subcommand("fit", "Fit per-layer Gaussian statistics on in-distribution rows");
  fit->add_option("--manifest", config.manifest, "Manifest CSV")->required();
  fit->add_option("--layers", layers_text, "Comma-separated layers (default L1,L2,L3,L4,L5)");
  fit->add_option("--lambda", config.lambda, "Covariance shrinkage weight in [0, 1]")
      ->capture_default_str();
  fit->add_option("--out", config.stats_dir, "Stats bundle directory")->required();
  fit->add_option("--calib-out", config.calib,
                  "Also write sum_z calibration (median/MAD of in-row distances)");

  auto* score = app.add_subcommand("score", "Score every manifest row against a stats bundle");
  score->add_option("--manifest", config.manifest, "Manifest CSV")->required();
  score->add_option("--stats", config.stats_dir, "Stats bundle directory")->required();
  score->add_option("--layers", layers_text, "Layers to score (default: all in the bundle)");
  score->add_option("--fusion", fusion_text, "single:L1..L5 | sum_raw | sum_z")
      ->capture_default_str();
  score->add_option("--calib", config.calib, "Calibration JSON for sum_z");
  score->add_option("--out", config.scores, "Scores CSV")->required();

  auto* eval = app.add_subcommand("eval", "ROC/AUC report for every score column");
  eval->add_option("--scores", config.scores, "Scores CSV")->required();
  eval->add_option("--sensitivity", config.sensitivity_target, "Target OOD recall in (0, 1]")
      ->capture_default_str();
  eval->add_option("--out", config.report, "Report JSON")->required();
  eval->add_option("--roc-dir", config.roc_dir, "Directory for roc_<method>.csv files");

  auto* calibrate = app.add_subcommand("calibrate", "Thresholds at a target OOD sensitivity");
  calibrate->add_option("--scores", config.scores, "Scores CSV")->required();
  calibrate->add_option("--sensitivity", config.sensitivity_target, "Target OOD recall in (0, 1]")
      ->capture_default_str();
  calibrate->add_option("--report", config.report, "Report JSON to add operating points to");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!layers_text.empty()) config.layers = parse_layer_list(layers_text);
    config.fusion_rule = parse_fusion_rule(fusion_text);
    if (fit->parsed()) {
      cmd_fit(config, out);
    } else if (score->parsed()) {
      cmd_score(config, out);
    } else if (eval->parsed()) {
      cmd_eval(config, out);
    } else if (calibrate->parsed()) {
      cmd_calibrate(config, out);
    }
  } catch (const Error& e) {
    err << "frodo: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "frodo: " << e.what() << '\n';
    return 4;
  }
  return 0;
}

}  // namespace frodo::cli
