#include "frodo/layer.hpp"

#include <algorithm>
#include <string>

#include "frodo/error.hpp"

namespace frodo {

std::string_view layer_name(Layer layer) noexcept {
  constexpr std::array<std::string_view, 5> names = {"L1", "L2", "L3", "L4", "L5"};
  return names[static_cast<std::size_t>(layer)];
}

std::optional<Layer> parse_layer(std::string_view name) noexcept {
  for (Layer layer : kAllLayers) {
    if (layer_name(layer) == name) return layer;
  }
  return std::nullopt;
}

std::vector<Layer> parse_layer_list(std::string_view list) {
  std::vector<Layer> layers;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view token = list.substr(start, comma - start);
    const auto layer = parse_layer(token);
    if (!layer) fail(ErrorCode::InvalidArgument, "unknown layer '" + std::string(token) + "'");
    if (std::find(layers.begin(), layers.end(), *layer) != layers.end()) {
      fail(ErrorCode::InvalidArgument, "layer '" + std::string(token) + "' listed twice");
    }
    layers.push_back(*layer);
    start = comma + 1;
  }
  std::sort(layers.begin(), layers.end());
  return layers;
}

}  // namespace frodo
