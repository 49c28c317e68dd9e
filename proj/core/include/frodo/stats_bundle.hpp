#pragma once

#include <filesystem>
#include <map>

#include "frodo/gaussian_stats.hpp"

namespace frodo {

using StatsBundle = std::map<Layer, LayerStats>;

inline constexpr int kBundleFormatVersion = 1;
inline constexpr std::size_t kCholChecksumEntries = 8;

/// Persists a bundle as DIR/meta.json plus DIR/<layer>.mean.ften (rank 1)
/// and DIR/<layer>.cov.ften (rank 2, the unregularized covariance).
///
/// Mean and covariance are stored as f32, so the factor a reader rebuilds
/// comes from the rounded values. The returned bundle is exactly what
/// read_stats_bundle() will produce; the recorded jitter and the diagonal
/// checksum in meta.json refer to it.
StatsBundle write_stats_bundle(const StatsBundle& bundle, const std::filesystem::path& dir);

/// Loads a bundle, refactors each covariance with the recorded shrinkage and
/// jitter, and checks the first factor diagonal entries against the stored
/// checksum (1e-6 relative). Mismatch is CorruptFile.
StatsBundle read_stats_bundle(const std::filesystem::path& dir);

}  // namespace frodo
