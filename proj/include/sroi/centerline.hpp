#pragma once

#include <algorithm>
#include <cmath>

#include "sroi/distance.hpp"
#include "sroi/eikonal.hpp"
#include "sroi/grid.hpp"

namespace sroi {

struct CenterlineOptions {
  /// Power applied to the normalized depth when weighting the second wave.
  double exponent = 6.0;
};

/// Centerline plus the intermediate fields it was derived from.
struct Centerline {
  Path path;              // end B -> end A
  ArrivalField arrival;   // second wave, sourced at end A
  ArrivalField first_wave;
  ScalarField distance;
};

/// Requires a nonempty, single 4-connected region; throws otherwise.
inline void require_single_region(const BinaryMask& mask) {
  const auto comps = connected_components(mask, Connectivity::kFour);
  if (comps.count == 0) fail(ErrorKind::kValidation, "empty region");
  if (comps.count > 1) {
    fail(ErrorKind::kValidation, "region not connected (" +
                                     std::to_string(comps.count) + " components)");
  }
}

/// Extracts the region's centerline with two fronts:
///  1. the depth map d picks the deepest voxel; a unit-cost front from it
///     finds the far end A;
///  2. a front from A with cost (d_max / d)^exponent, so it runs fastest
///     through deep voxels, finds the other end B;
///  3. steepest descent on the second front from B back to A.
inline Centerline extract_centerline(const BinaryMask& mask,
                                     const CenterlineOptions& options = {}) {
  require_single_region(mask);
  if (!(options.exponent >= 0.0) || !std::isfinite(options.exponent)) {
    fail(ErrorKind::kValidation, "exponent must be finite and non-negative");
  }

  ScalarField distance = euclidean_distance_map(mask);
  const Coord deepest = argmax_field(distance);
  const double d_max = distance[deepest];

  ScalarField unit(mask.dims(), 1.0);
  ArrivalField first = fast_march(unit, mask, deepest);
  const Coord end_a = argmax_field(first);

  ScalarField cost(mask.dims(), 1.0);
  for (std::size_t i = 0; i < cost.size(); ++i) {
    if (mask[i]) cost[i] = std::pow(d_max / distance[i], options.exponent);
  }
  ArrivalField second = fast_march(cost, mask, end_a);
  const Coord end_b = argmax_field(second);
  Path path = descend(second, end_b);

  return Centerline{std::move(path), std::move(second), std::move(first),
                    std::move(distance)};
}

}  // namespace sroi
