#include "frodo/stats_bundle.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "frodo/error.hpp"

namespace frodo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<float> to_f32(const double* values, std::size_t count) {
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<float>(values[i]);
  return out;
}

GaussianStats rounded_to_f32(const GaussianStats& g) {
  const Eigen::VectorXd mean = g.mean().cast<float>().cast<double>();
  const Eigen::MatrixXd cov = g.covariance().cast<float>().cast<double>();
  return GaussianStats::from_moments(g.count(), mean, cov, g.lambda());
}

std::vector<double> diag_checksum(const GaussianStats& g) {
  const std::size_t count = std::min(kCholChecksumEntries, g.dim());
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = g.cholesky()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  }
  return out;
}

std::string file_stem(Layer layer) { return std::string(layer_name(layer)); }

}  // namespace

StatsBundle write_stats_bundle(const StatsBundle& bundle, const std::filesystem::path& dir) {
  if (bundle.empty()) fail(ErrorCode::InvalidArgument, "refusing to write an empty stats bundle");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  StatsBundle persisted;
  ordered_json meta;
  meta["format_version"] = kBundleFormatVersion;
  meta["layers"] = ordered_json::array();
  for (const auto& [layer, stats] : bundle) {
    GaussianStats stored = rounded_to_f32(stats.gaussian);
    const std::size_t d = stored.dim();
    const std::string mean_file = file_stem(layer) + ".mean.ften";
    const std::string cov_file = file_stem(layer) + ".cov.ften";

    // Column-major storage of a symmetric matrix equals its row-major layout.
    write_tensor(FeatureTensor({static_cast<std::uint32_t>(d)}, to_f32(stored.mean().data(), d)),
                 dir / mean_file);
    write_tensor(FeatureTensor({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d)},
                               to_f32(stored.covariance().data(), d * d)),
                 dir / cov_file);

    ordered_json entry;
    entry["layer"] = file_stem(layer);
    entry["d"] = d;
    entry["n"] = stored.count();
    entry["lambda"] = stored.lambda();
    entry["jitter_used"] = stored.jitter_used();
    entry["chol_diag_checksum"] = diag_checksum(stored);
    entry["mean_file"] = mean_file;
    entry["cov_file"] = cov_file;
    meta["layers"].push_back(std::move(entry));

    persisted.emplace(layer, LayerStats{layer, std::move(stored)});
  }

  const auto meta_path = dir / "meta.json";
  std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + meta_path.string() + " for writing");
  out << meta.dump(2) << '\n';
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + meta_path.string());
  return persisted;
}

StatsBundle read_stats_bundle(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream in(meta_path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + meta_path.string());

  ordered_json meta;
  try {
    meta = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, meta_path.string() + ": " + e.what());
  }

  StatsBundle bundle;
  try {
    if (meta.at("format_version").get<int>() != kBundleFormatVersion) {
      fail(ErrorCode::FormatError, meta_path.string() + ": unsupported bundle format version");
    }
    for (const auto& entry : meta.at("layers")) {
      const auto name = entry.at("layer").get<std::string>();
      const auto layer = parse_layer(name);
      if (!layer) fail(ErrorCode::FormatError, meta_path.string() + ": unknown layer " + name);
      const auto d = entry.at("d").get<std::size_t>();
      const auto n = entry.at("n").get<std::size_t>();
      const auto lambda = entry.at("lambda").get<double>();
      const auto jitter = entry.at("jitter_used").get<double>();
      const auto checksum = entry.at("chol_diag_checksum").get<std::vector<double>>();

      const FeatureTensor mean_t = read_tensor(dir / entry.at("mean_file").get<std::string>());
      const FeatureTensor cov_t = read_tensor(dir / entry.at("cov_file").get<std::string>());
      if (mean_t.rank() != 1 || mean_t.size() != d) {
        fail(ErrorCode::CorruptFile, name + " mean file does not hold a length-" +
                                         std::to_string(d) + " vector");
      }
      if (cov_t.rank() != 2 || cov_t.dims()[0] != d || cov_t.dims()[1] != d) {
        fail(ErrorCode::CorruptFile, name + " covariance file is not " + std::to_string(d) +
                                         "x" + std::to_string(d));
      }
      if (d != expected_channels(*layer)) {
        fail(ErrorCode::ShapeError, name + " stats have d=" + std::to_string(d));
      }

      Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXf>(
                                 mean_t.data().data(), static_cast<Eigen::Index>(d))
                                 .cast<double>();
      Eigen::MatrixXd cov =
          Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              cov_t.data().data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))
              .cast<double>();

      GaussianStats g = GaussianStats::restore(n, std::move(mean), std::move(cov), lambda, jitter);
      const auto actual = diag_checksum(g);
      if (checksum.size() != actual.size()) {
        fail(ErrorCode::CorruptFile, name + " checksum has wrong length");
      }
      for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!(std::abs(actual[i] - checksum[i]) <= 1e-6 * std::abs(checksum[i]))) {
          fail(ErrorCode::CorruptFile, name + " factor diagonal does not match stored checksum");
        }
      }
      if (!bundle.emplace(*layer, LayerStats{*layer, std::move(g)}).second) {
        fail(ErrorCode::FormatError, meta_path.string() + ": layer " + name + " listed twice");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, meta_path.string() + ": " + e.what());
  }
  if (bundle.empty()) fail(ErrorCode::FormatError, meta_path.string() + ": no layers");
  return bundle;
}

}  // namespace frodo
