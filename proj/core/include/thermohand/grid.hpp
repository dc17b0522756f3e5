#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace thermohand {

/// Row-major 2D pixel grid. Index convention everywhere in this project:
/// x = column (rightward), y = row (downward), origin at the top-left.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) {
    assert(in_bounds(x, y));
    return data[static_cast<size_t>(y) * width + x];
  }
  const T& at(int x, int y) const {
    assert(in_bounds(x, y));
    return data[static_cast<size_t>(y) * width + x];
  }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  bool operator==(const Grid&) const = default;
};

/// Binary silhouette image, values restricted to {0, 1}.
using BinaryImage = Grid<std::uint8_t>;

/// Single-channel 16-bit intensity frame (raw capture format).
using GrayImage16 = Grid<std::uint16_t>;

}  // namespace thermohand
