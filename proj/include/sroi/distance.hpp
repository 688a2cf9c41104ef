#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sroi/grid.hpp"

namespace sroi {

namespace detail {

inline std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

}  // namespace detail

/// Squared Euclidean distance from every voxel center to the nearest
/// background voxel center, computed exactly in integers. Everything outside
/// the grid counts as background, so true voxels always get a value >= 1.
///
/// Two separable passes (Meijster, Roerdink and Hesselink): a column scan for
/// the vertical distance, then a lower envelope of parabolas along each row.
/// The row pass runs over x = -1 .. width so that the off-grid background
/// columns take part in the envelope.
inline Grid<std::int64_t> squared_distance_map(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();

  // Vertical distance to background; off-grid rows y = -1 and y = h count.
  Grid<std::int64_t> g(mask.dims(), 0);
  for (int x = 0; x < w; ++x) {
    std::int64_t run = 0;
    for (int y = 0; y < h; ++y) {
      run = mask[Coord{x, y}] ? run + 1 : 0;
      g[Coord{x, y}] = run;
    }
    run = 0;
    for (int y = h - 1; y >= 0; --y) {
      run = mask[Coord{x, y}] ? run + 1 : 0;
      if (run < g[Coord{x, y}]) g[Coord{x, y}] = run;
    }
  }

  Grid<std::int64_t> out(mask.dims(), 0);
  const int m = w + 2;  // padded positions; position u maps to column u - 1
  std::vector<std::int64_t> gsq(static_cast<std::size_t>(m), 0);
  std::vector<int> s(static_cast<std::size_t>(m));
  std::vector<int> t(static_cast<std::size_t>(m));

  for (int y = 0; y < h; ++y) {
    for (int u = 1; u <= w; ++u) {
      const std::int64_t v = g[Coord{u - 1, y}];
      gsq[static_cast<std::size_t>(u)] = v * v;
    }
    gsq.front() = 0;
    gsq.back() = 0;

    auto f = [&](int x, int i) {
      const std::int64_t d = x - i;
      return d * d + gsq[static_cast<std::size_t>(i)];
    };
    auto sep = [&](int i, int u) {
      const std::int64_t num = std::int64_t{u} * u - std::int64_t{i} * i +
                               gsq[static_cast<std::size_t>(u)] -
                               gsq[static_cast<std::size_t>(i)];
      return detail::floor_div(num, 2 * std::int64_t{u - i});
    };

    int q = 0;
    s[0] = 0;
    t[0] = 0;
    for (int u = 1; u < m; ++u) {
      while (q >= 0 && f(t[q], s[q]) > f(t[q], u)) --q;
      if (q < 0) {
        q = 0;
        s[0] = u;
      } else {
        const std::int64_t next = 1 + sep(s[q], u);
        if (next < m) {
          ++q;
          s[q] = u;
          t[q] = static_cast<int>(next);
        }
      }
    }
    for (int u = m - 1; u >= 0; --u) {
      if (u >= 1 && u <= w) out[Coord{u - 1, y}] = f(u, s[q]);
      if (u == t[q]) --q;
    }
  }
  return out;
}

/// Exact Euclidean distance map: distance to the nearest non-region voxel
/// for region voxels, 0 for background.
inline ScalarField euclidean_distance_map(const BinaryMask& mask) {
  if (count_true(mask) == 0) fail(ErrorKind::kValidation, "empty region");
  const auto sq = squared_distance_map(mask);
  ScalarField out(mask.dims(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(static_cast<double>(sq[i]));
  }
  return out;
}

}  // namespace sroi
