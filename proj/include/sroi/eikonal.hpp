#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "sroi/grid.hpp"

namespace sroi {

/// First-arrival times of a front started at `source`. Values are +infinity
/// exactly outside the domain the front was solved on.
struct ArrivalField {
  ScalarField values;
  Coord source;
};

/// Ordered voxel chain; consecutive entries are 8-adjacent, no repeats.
using Path = std::vector<Coord>;

/// Upwind solution of (u - a)+^2 + (u - b)+^2 = cost^2, where a and b are
/// the smaller horizontal and vertical neighbor values (either may be
/// +infinity). Falls back to the one-sided value when |a - b| >= cost.
inline double upwind_update(double a, double b, double cost) {
  if (a > b) std::swap(a, b);
  if (b == kInfinity || b - a >= cost) return a + cost;
  const double diff = a - b;
  return 0.5 * (a + b + std::sqrt(2.0 * cost * cost - diff * diff));
}

namespace detail {

inline std::string coord_text(Coord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

}  // namespace detail

/// Solves |grad U| = potential on the true voxels of `domain` with the
/// first-order upwind scheme, expanding from `source` in arrival order.
/// Accepted voxels are final; heap ties resolve by row-major index.
inline ArrivalField fast_march(const ScalarField& potential, const BinaryMask& domain,
                               Coord source) {
  const GridDims dims = domain.dims();
  if (potential.dims() != dims) {
    fail(ErrorKind::kValidation, "potential and domain dimensions differ");
  }
  if (!in_bounds(source, dims) || !domain[source]) {
    fail(ErrorKind::kValidation,
         "source " + detail::coord_text(source) + " is not inside the domain");
  }
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] && !(potential[i] > 0.0 && std::isfinite(potential[i]))) {
      fail(ErrorKind::kValidation, "potential must be positive and finite at " +
                                       detail::coord_text(coord_of(i, dims)));
    }
  }

  ScalarField u(dims, kInfinity);
  std::vector<std::uint8_t> accepted(dims.size(), 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  const std::size_t src = linear_index(source, dims);
  u[src] = 0.0;
  heap.emplace(0.0, src);

  while (!heap.empty()) {
    const auto [value, index] = heap.top();
    heap.pop();
    if (accepted[index] || value != u[index]) continue;
    accepted[index] = 1;
    const Coord c = coord_of(index, dims);
    for_each_neighbor(c, dims, Connectivity::kFour, [&](Coord n) {
      const std::size_t j = linear_index(n, dims);
      if (!domain[j] || accepted[j]) return;
      // Only accepted neighbors enter the update.
      auto known = [&](int x, int y) {
        const Coord m{x, y};
        if (!in_bounds(m, dims)) return kInfinity;
        const std::size_t k = linear_index(m, dims);
        return accepted[k] ? u[k] : kInfinity;
      };
      const double a = std::min(known(n.x - 1, n.y), known(n.x + 1, n.y));
      const double b = std::min(known(n.x, n.y - 1), known(n.x, n.y + 1));
      const double candidate = upwind_update(a, b, potential[j]);
      if (candidate < u[j]) {
        u[j] = candidate;
        heap.emplace(candidate, j);
      }
    });
  }
  return ArrivalField{std::move(u), source};
}

/// Location of the largest finite value; ties go to the smallest row-major index.
inline Coord argmax_field(const ScalarField& field) {
  std::size_t best = field.size();
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!std::isfinite(field[i])) continue;
    if (best == field.size() || field[i] > field[best]) best = i;
  }
  if (best == field.size()) fail(ErrorKind::kValidation, "field has no finite value");
  return coord_of(best, field.dims());
}

inline Coord argmax_field(const ArrivalField& arrival) {
  return argmax_field(arrival.values);
}

/// Discrete steepest descent on an arrival field: from `start`, repeatedly
/// step to the 8-neighbor with the strictly smallest value until U = 0.
/// The returned path runs start -> source.
inline Path descend(const ArrivalField& arrival, Coord start) {
  const ScalarField& u = arrival.values;
  const GridDims dims = u.dims();
  if (!in_bounds(start, dims) || !std::isfinite(u[start])) {
    fail(ErrorKind::kValidation,
         "descent start " + detail::coord_text(start) + " has no finite arrival time");
  }
  Path path{start};
  Coord cur = start;
  while (u[cur] > 0.0) {
    Coord next = cur;
    double best = u[cur];
    for_each_neighbor(cur, dims, Connectivity::kEight, [&](Coord n) {
      if (u[n] < best) {
        best = u[n];
        next = n;
      }
    });
    if (next == cur) {
      fail(ErrorKind::kAlgorithm,
           "stuck at non-source local minimum " + detail::coord_text(cur));
    }
    path.push_back(next);
    cur = next;
  }
  return path;
}

}  // namespace sroi
