#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace frodo {

/// A dense activation block stored row-major. Rank 3 tensors are (H, W, C);
/// rank 1 holds pooled or softmax vectors and rank 2 holds matrices.
///
/// Construction validates the invariants: 1 <= rank <= 3, every extent >= 1,
/// data length equals the product of the extents, every element finite.
class FeatureTensor {
 public:
  FeatureTensor(std::vector<std::uint32_t> dims, std::vector<float> data);

  std::span<const std::uint32_t> dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::span<const float> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  /// Extents with missing leading axes treated as 1.
  std::size_t height() const noexcept;
  std::size_t width() const noexcept;
  std::size_t channels() const noexcept { return dims_.back(); }

  float at(std::size_t h, std::size_t w, std::size_t c) const noexcept {
    return data_[(h * width() + w) * channels() + c];
  }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::vector<std::uint32_t> dims_;
  std::vector<float> data_;
};

namespace ften {
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;
inline constexpr std::size_t kPreambleBytes = 8;  // magic + version + dtype + ndim
}  // namespace ften

/// Serializes to the little-endian FTEN layout.
std::vector<std::byte> encode_tensor(const FeatureTensor& tensor);

/// Parses an FTEN byte image. Throws FormatError, CorruptFile or NonFiniteData.
FeatureTensor decode_tensor(std::span<const std::byte> bytes);

FeatureTensor read_tensor(const std::filesystem::path& path);

/// Reads only the header and returns the stored extents.
std::vector<std::uint32_t> read_tensor_dims(const std::filesystem::path& path);

void write_tensor(const FeatureTensor& tensor, const std::filesystem::path& path);

}  // namespace frodo
