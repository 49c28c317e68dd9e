#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frodo/layer.hpp"

namespace frodo {

enum class SampleLabel { In, Ood, Unlabeled };

std::string_view label_name(SampleLabel label) noexcept;
std::optional<SampleLabel> parse_label(std::string_view token) noexcept;

struct ManifestRecord {
  std::string sample_id;
  SampleLabel label = SampleLabel::Unlabeled;
  std::map<Layer, std::filesystem::path> tensor_paths;  // empty cells are absent
  std::optional<std::filesystem::path> softmax_path;
};

/// Dataset description. Paths are stored as written in the CSV; resolve them
/// against base_dir (the manifest's own directory) before opening.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const std::filesystem::path& relative) const {
    return relative.is_absolute() ? relative : base_dir / relative;
  }
};

inline constexpr std::string_view kManifestHeader = "sample_id,label,L1,L2,L3,L4,L5,softmax";

/// Parses manifest CSV text. Columns are located by header name; all eight
/// are required. Throws MissingColumn, BadLabel, DuplicateSample, MalformedRow.
Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir = {});

Manifest read_manifest(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Reads the header of every referenced layer tensor and checks its channel
/// count against the layer; softmax files must be rank 1. Throws ShapeError
/// naming the sample, or IoError/FormatError from the file.
void validate_manifest_files(const Manifest& manifest);

}  // namespace frodo
