#include "frodo/manifest.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "frodo/error.hpp"
#include "frodo/tensor_io.hpp"

namespace frodo {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view label_name(SampleLabel label) noexcept {
  switch (label) {
    case SampleLabel::In: return "in";
    case SampleLabel::Ood: return "ood";
    case SampleLabel::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::optional<SampleLabel> parse_label(std::string_view token) noexcept {
  if (token == "in") return SampleLabel::In;
  if (token == "ood") return SampleLabel::Ood;
  if (token == "unlabeled") return SampleLabel::Unlabeled;
  return std::nullopt;
}

Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir) {
  Manifest manifest;
  manifest.base_dir = std::move(base_dir);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = strip_cr(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    return line;
  };

  const auto header_line = next_line();
  if (!header_line) fail(ErrorCode::MissingColumn, "manifest is empty");
  const auto header = split_fields(*header_line);

  auto column_of = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    fail(ErrorCode::MissingColumn, "manifest header lacks column '" + std::string(name) + "'");
  };
  const std::size_t id_col = column_of("sample_id");
  const std::size_t label_col = column_of("label");
  std::array<std::size_t, 5> layer_cols{};
  for (Layer layer : kAllLayers) {
    layer_cols[static_cast<std::size_t>(layer)] = column_of(layer_name(layer));
  }
  const std::size_t softmax_col = column_of("softmax");

  std::set<std::string, std::less<>> seen;
  while (const auto line = next_line()) {
    if (line->empty()) continue;
    const auto fields = split_fields(*line);
    if (fields.size() != header.size()) {
      fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    }
    ManifestRecord record;
    record.sample_id = std::string(fields[id_col]);
    if (record.sample_id.empty()) {
      fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + " has empty sample_id");
    }
    const auto label = parse_label(fields[label_col]);
    if (!label) {
      fail(ErrorCode::BadLabel, "line " + std::to_string(line_no) + ": unknown label '" +
                                    std::string(fields[label_col]) + "'");
    }
    record.label = *label;
    if (!seen.insert(record.sample_id).second) {
      fail(ErrorCode::DuplicateSample, "sample_id '" + record.sample_id + "' appears twice");
    }
    for (Layer layer : kAllLayers) {
      const auto cell = fields[layer_cols[static_cast<std::size_t>(layer)]];
      if (!cell.empty()) record.tensor_paths.emplace(layer, std::filesystem::path(cell));
    }
    if (!fields[softmax_col].empty()) record.softmax_path = std::filesystem::path(fields[softmax_col]);
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open manifest " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_manifest(buffer.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << kManifestHeader << '\n';
  for (const auto& record : manifest.records) {
    out << record.sample_id << ',' << label_name(record.label);
    for (Layer layer : kAllLayers) {
      out << ',';
      if (auto it = record.tensor_paths.find(layer); it != record.tensor_paths.end()) {
        out << it->second.generic_string();
      }
    }
    out << ',';
    if (record.softmax_path) out << record.softmax_path->generic_string();
    out << '\n';
  }
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

void validate_manifest_files(const Manifest& manifest) {
  for (const auto& record : manifest.records) {
    for (const auto& [layer, rel] : record.tensor_paths) {
      const auto dims = read_tensor_dims(manifest.resolve(rel));
      if (dims.back() != expected_channels(layer)) {
        fail(ErrorCode::ShapeError,
             "sample '" + record.sample_id + "' layer " + std::string(layer_name(layer)) +
                 " has " + std::to_string(dims.back()) + " channels, expected " +
                 std::to_string(expected_channels(layer)));
      }
    }
    if (record.softmax_path) {
      const auto dims = read_tensor_dims(manifest.resolve(*record.softmax_path));
      if (dims.size() != 1) {
        fail(ErrorCode::ShapeError,
             "sample '" + record.sample_id + "' softmax file must be a rank-1 tensor");
      }
    }
  }
}

}  // namespace frodo
