#include "frodo/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "frodo/error.hpp"

namespace frodo {

namespace {

constexpr std::byte kMagic[4] = {std::byte{'F'}, std::byte{'T'}, std::byte{'E'}, std::byte{'N'}};
constexpr std::size_t kMaxRank = 3;

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFFu));
  out.push_back(static_cast<std::byte>((v >> 8) & 0xFFu));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
  }
}

std::uint16_t get_u16(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint16_t>(std::to_integer<std::uint16_t>(b[off]) |
                                    (std::to_integer<std::uint16_t>(b[off + 1]) << 8));
}

std::uint32_t get_u32(std::span<const std::byte> b, std::size_t off) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

struct Header {
  std::vector<std::uint32_t> dims;
  std::uint64_t element_count = 1;
  std::size_t payload_offset = 0;
};

Header parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    fail(ErrorCode::FormatError, "bad magic, expected \"FTEN\"");
  }
  if (bytes.size() < ften::kPreambleBytes) fail(ErrorCode::CorruptFile, "truncated header");
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != ften::kVersion) {
    fail(ErrorCode::FormatError, "unsupported version " + std::to_string(version));
  }
  const auto dtype = std::to_integer<std::uint8_t>(bytes[6]);
  if (dtype != ften::kDtypeF32) {
    fail(ErrorCode::FormatError, "unsupported dtype code " + std::to_string(dtype));
  }
  const auto ndim = std::to_integer<std::uint8_t>(bytes[7]);
  if (ndim < 1 || ndim > kMaxRank) {
    fail(ErrorCode::FormatError, "unsupported ndim " + std::to_string(ndim));
  }

  Header header;
  header.payload_offset = ften::kPreambleBytes + 4u * ndim;
  if (bytes.size() < header.payload_offset) fail(ErrorCode::CorruptFile, "truncated dims");
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::uint32_t extent = get_u32(bytes, ften::kPreambleBytes + 4 * i);
    if (extent == 0) fail(ErrorCode::CorruptFile, "zero extent on axis " + std::to_string(i));
    header.dims.push_back(extent);
    header.element_count *= extent;  // at most (2^32)^3 < 2^96; guarded below
    if (header.element_count > std::numeric_limits<std::uint64_t>::max() / 4 / 0xFFFFFFFFu) {
      fail(ErrorCode::CorruptFile, "dims product overflows");
    }
  }
  return header;
}

std::vector<std::byte> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const std::streamsize size = in.tellg();
  if (size < 0) fail(ErrorCode::IoError, "cannot size " + path.string());
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  in.seekg(0);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    fail(ErrorCode::IoError, "short read on " + path.string());
  }
  return bytes;
}

}  // namespace

FeatureTensor::FeatureTensor(std::vector<std::uint32_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (dims_.empty() || dims_.size() > kMaxRank) {
    fail(ErrorCode::ShapeError, "tensor rank must be 1, 2 or 3");
  }
  std::uint64_t count = 1;
  for (std::uint32_t extent : dims_) {
    if (extent == 0) fail(ErrorCode::ShapeError, "tensor extents must be positive");
    count *= extent;
  }
  if (count != data_.size()) {
    fail(ErrorCode::ShapeError, "tensor holds " + std::to_string(data_.size()) +
                                    " values but dims imply " + std::to_string(count));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorCode::NonFiniteData, "non-finite value at flat index " + std::to_string(i));
    }
  }
}

std::size_t FeatureTensor::height() const noexcept { return rank() == 3 ? dims_[0] : 1; }

std::size_t FeatureTensor::width() const noexcept {
  return rank() >= 2 ? dims_[rank() - 2] : 1;
}

std::vector<std::byte> encode_tensor(const FeatureTensor& tensor) {
  std::vector<std::byte> out;
  out.reserve(ften::kPreambleBytes + 4 * tensor.rank() + 4 * tensor.size());
  for (std::byte b : kMagic) out.push_back(b);
  put_u16(out, ften::kVersion);
  out.push_back(std::byte{ften::kDtypeF32});
  out.push_back(static_cast<std::byte>(tensor.rank()));
  for (std::uint32_t extent : tensor.dims()) put_u32(out, extent);
  for (float value : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(value));
  return out;
}

FeatureTensor decode_tensor(std::span<const std::byte> bytes) {
  Header header = parse_header(bytes);
  const std::uint64_t expected = header.payload_offset + 4 * header.element_count;
  if (bytes.size() != expected) {
    fail(ErrorCode::CorruptFile, "payload is " + std::to_string(bytes.size()) +
                                     " bytes, dims imply " + std::to_string(expected));
  }
  std::vector<float> data(header.element_count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, header.payload_offset + 4 * i));
    if (!std::isfinite(data[i])) {
      fail(ErrorCode::NonFiniteData, "non-finite value at flat index " + std::to_string(i));
    }
  }
  return FeatureTensor(std::move(header.dims), std::move(data));
}

FeatureTensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint32_t> read_tensor_dims(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::byte> head(ften::kPreambleBytes + 4 * kMaxRank);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  try {
    return parse_header(head).dims;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(const FeatureTensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

}  // namespace frodo
