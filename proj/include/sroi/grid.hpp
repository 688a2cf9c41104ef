#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sroi/error.hpp"

namespace sroi {

/// Upper bound on width * height accepted by GridDims::checked().
inline constexpr std::int64_t kDefaultMaxVoxels = std::int64_t{1} << 26;

struct GridDims {
  int width = 1;
  int height = 1;

  /// Validated construction: both extents positive and the voxel count
  /// no larger than max_voxels.
  static GridDims checked(std::int64_t width, std::int64_t height,
                          std::int64_t max_voxels = kDefaultMaxVoxels) {
    if (width < 1 || height < 1) {
      fail(ErrorKind::kValidation,
           "grid dimensions must be positive, got " + std::to_string(width) +
               "x" + std::to_string(height));
    }
    if (width > max_voxels / height) {
      fail(ErrorKind::kValidation,
           "grid of " + std::to_string(width) + "x" + std::to_string(height) +
               " exceeds the voxel cap of " + std::to_string(max_voxels));
    }
    return GridDims{static_cast<int>(width), static_cast<int>(height)};
  }

  std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct Coord {
  int x = 0;
  int y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
};

inline bool in_bounds(Coord c, GridDims dims) {
  return c.x >= 0 && c.y >= 0 && c.x < dims.width && c.y < dims.height;
}

inline std::size_t linear_index(Coord c, GridDims dims) {
  return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(dims.width) +
         static_cast<std::size_t>(c.x);
}

inline Coord coord_of(std::size_t index, GridDims dims) {
  const auto w = static_cast<std::size_t>(dims.width);
  return Coord{static_cast<int>(index % w), static_cast<int>(index / w)};
}

/// Dense row-major field over a grid. All per-voxel data in the library
/// (masks, distance and arrival fields, labels) is one of these.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(GridDims dims, T fill = T{})
      : dims_(dims), data_(dims.size(), fill) {}
  Grid(GridDims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.size()) {
      fail(ErrorKind::kValidation, "grid data length does not match dimensions");
    }
  }

  GridDims dims() const { return dims_; }
  int width() const { return dims_.width; }
  int height() const { return dims_.height; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](Coord c) { return data_[linear_index(c, dims_)]; }
  const T& operator[](Coord c) const { return data_[linear_index(c, dims_)]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  GridDims dims_{};
  std::vector<T> data_;
};

/// Occupancy: nonzero = inside the region.
using BinaryMask = Grid<std::uint8_t>;
/// Non-negative reals; +infinity marks unreached or undefined voxels.
using ScalarField = Grid<double>;
/// 0 = background, 1..k = region labels.
using LabelMap = Grid<std::uint32_t>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Connectivity { kFour = 4, kEight = 8 };

namespace detail {
// N, S, W, E, NW, NE, SW, SE
inline constexpr std::array<std::pair<int, int>, 8> kNeighborOffsets{{
    {0, -1}, {0, 1}, {-1, 0}, {1, 0}, {-1, -1}, {1, -1}, {-1, 1}, {1, 1}}};
}  // namespace detail

/// Calls fn(Coord) for each in-bounds neighbor of c in the fixed order
/// N, S, W, E (then NW, NE, SW, SE for 8-connectivity). No bounds check on c.
template <typename Fn>
void for_each_neighbor(Coord c, GridDims dims, Connectivity conn, Fn&& fn) {
  const int count = static_cast<int>(conn);
  for (int k = 0; k < count; ++k) {
    const Coord n{c.x + detail::kNeighborOffsets[k].first,
                  c.y + detail::kNeighborOffsets[k].second};
    if (in_bounds(n, dims)) fn(n);
  }
}

inline std::vector<Coord> neighbors(Coord c, GridDims dims, Connectivity conn) {
  if (!in_bounds(c, dims)) {
    fail(ErrorKind::kValidation, "coordinate (" + std::to_string(c.x) + "," +
                                     std::to_string(c.y) + ") is out of bounds");
  }
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>(conn));
  for_each_neighbor(c, dims, conn, [&](Coord n) { out.push_back(n); });
  return out;
}

inline std::size_t count_true(const BinaryMask& mask) {
  std::size_t n = 0;
  for (auto v : mask.data()) n += v != 0;
  return n;
}

struct Components {
  LabelMap labels;
  std::uint32_t count = 0;
};

/// Labels the true voxels of mask by connected component. Components are
/// numbered 1..count in order of first encounter in a row-major scan.
inline Components connected_components(const BinaryMask& mask, Connectivity conn) {
  const GridDims dims = mask.dims();
  Components out{LabelMap(dims, 0u), 0u};
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || out.labels[i] != 0) continue;
    const std::uint32_t label = ++out.count;
    out.labels[i] = label;
    stack.push_back(i);
    while (!stack.empty()) {
      const Coord c = coord_of(stack.back(), dims);
      stack.pop_back();
      for_each_neighbor(c, dims, conn, [&](Coord n) {
        const std::size_t j = linear_index(n, dims);
        if (mask[j] && out.labels[j] == 0) {
          out.labels[j] = label;
          stack.push_back(j);
        }
      });
    }
  }
  return out;
}

}  // namespace sroi
