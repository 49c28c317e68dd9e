#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace frodo {

/// Hook points in a 50-layer residual network, one per spatial resolution.
/// L1 is the first convolution; L2..L5 are the deepest residual block
/// outputs at 56, 28, 14 and 7 pixels for a 224x224 input.
enum class Layer { L1 = 0, L2, L3, L4, L5 };

inline constexpr std::array<Layer, 5> kAllLayers = {Layer::L1, Layer::L2, Layer::L3, Layer::L4,
                                                    Layer::L5};

struct LayerShape {
  std::size_t height;
  std::size_t width;
  std::size_t channels;
};

constexpr LayerShape reference_shape(Layer layer) noexcept {
  constexpr std::array<LayerShape, 5> shapes = {{
      {112, 112, 64},
      {56, 56, 256},
      {28, 28, 512},
      {14, 14, 1024},
      {7, 7, 2048},
  }};
  return shapes[static_cast<std::size_t>(layer)];
}

constexpr std::size_t expected_channels(Layer layer) noexcept {
  return reference_shape(layer).channels;
}

std::string_view layer_name(Layer layer) noexcept;

std::optional<Layer> parse_layer(std::string_view name) noexcept;

/// Parses a comma-separated list such as "L1,L3". Throws InvalidArgument on
/// unknown or repeated names, or an empty list. Result is in L1..L5 order.
std::vector<Layer> parse_layer_list(std::string_view list);

}  // namespace frodo
