#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sroi/centerline.hpp"
#include "sroi/eikonal.hpp"
#include "sroi/grid.hpp"

namespace sroi {

struct Vector2 {
  double dx = 0.0;
  double dy = 0.0;

  friend bool operator==(const Vector2&, const Vector2&) = default;
};

struct Cut {
  std::size_t index = 0;  // position of the anchor on the centerline
  Coord anchor;
  Vector2 normal;

  friend bool operator==(const Cut&, const Cut&) = default;
};

/// Cuts in centerline order.
using CutPlan = std::vector<Cut>;

/// Centerline direction at path[i] from its two neighbors on the path.
inline Vector2 normal_at(const Path& path, std::size_t i) {
  if (i < 1 || i + 1 >= path.size()) {
    fail(ErrorKind::kValidation, "normal requested at path endpoint index " +
                                     std::to_string(i));
  }
  const Coord prev = path[i - 1];
  const Coord next = path[i + 1];
  const Vector2 n{static_cast<double>(next.x - prev.x),
                  static_cast<double>(next.y - prev.y)};
  if (n.dx == 0.0 && n.dy == 0.0) {
    fail(ErrorKind::kAlgorithm, "degenerate tangent at path index " + std::to_string(i));
  }
  return n;
}

/// k - 1 anchors at path indices round(j (L - 1) / k), j = 1 .. k - 1.
inline CutPlan sample_cut_points(const Path& path, int k) {
  if (k < 1) fail(ErrorKind::kValidation, "k must be at least 1");
  if (k == 1) return {};
  const std::size_t length = path.size();
  if (length < 2 * static_cast<std::size_t>(k) + 1) {
    fail(ErrorKind::kValidation, "k too large for region (centerline has " +
                                     std::to_string(length) + " voxels, k = " +
                                     std::to_string(k) + ")");
  }
  CutPlan plan;
  plan.reserve(static_cast<std::size_t>(k - 1));
  const auto span = static_cast<std::uint64_t>(length - 1);
  const auto parts = static_cast<std::uint64_t>(k);
  for (std::uint64_t j = 1; j < parts; ++j) {
    // Round half up in integers.
    const std::size_t index = static_cast<std::size_t>((2 * j * span + parts) / (2 * parts));
    plan.push_back(Cut{index, path[index], normal_at(path, index)});
  }
  return plan;
}

namespace detail {

inline bool in_band(Coord p, Coord anchor, Vector2 n) {
  const double dot = n.dx * (p.x - anchor.x) + n.dy * (p.y - anchor.y);
  return 2.0 * std::abs(dot) <= std::max(std::abs(n.dx), std::abs(n.dy));
}

}  // namespace detail

/// Voxels of `mask` on the one-voxel-thick digital line through `anchor`
/// perpendicular to `n`, restricted to the part 8-connected to the anchor.
/// Returned in row-major order.
inline std::vector<Coord> cut_band(const BinaryMask& mask, Coord anchor, Vector2 n) {
  const GridDims dims = mask.dims();
  if (!in_bounds(anchor, dims) || !mask[anchor]) {
    fail(ErrorKind::kValidation, "cut anchor is not a region voxel");
  }
  if (n.dx == 0.0 && n.dy == 0.0) fail(ErrorKind::kValidation, "zero cut normal");

  std::vector<std::uint8_t> seen(dims.size(), 0);
  std::vector<std::size_t> stack{linear_index(anchor, dims)};
  std::vector<std::size_t> members;
  seen[stack.front()] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    members.push_back(i);
    for_each_neighbor(coord_of(i, dims), dims, Connectivity::kEight, [&](Coord q) {
      const std::size_t j = linear_index(q, dims);
      if (seen[j] || !mask[j] || !detail::in_band(q, anchor, n)) return;
      seen[j] = 1;
      stack.push_back(j);
    });
  }
  std::sort(members.begin(), members.end());
  std::vector<Coord> out;
  out.reserve(members.size());
  for (auto i : members) out.push_back(coord_of(i, dims));
  return out;
}

namespace detail {

/// Voxels of the given label in row-major order.
inline std::vector<std::size_t> label_voxels(const LabelMap& labels, std::uint32_t label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

/// Splits the voxels of `label` into 4-connected pieces, each in row-major
/// order, ordered by their first voxel.
inline std::vector<std::vector<std::size_t>> label_pieces(const LabelMap& labels,
                                                          std::uint32_t label) {
  const GridDims dims = labels.dims();
  std::vector<std::vector<std::size_t>> pieces;
  std::vector<std::uint8_t> seen(dims.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != label || seen[i]) continue;
    std::vector<std::size_t> piece;
    std::vector<std::size_t> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      piece.push_back(v);
      for_each_neighbor(coord_of(v, dims), dims, Connectivity::kFour, [&](Coord q) {
        const std::size_t j = linear_index(q, dims);
        if (!seen[j] && labels[j] == label) {
          seen[j] = 1;
          stack.push_back(j);
        }
      });
    }
    std::sort(piece.begin(), piece.end());
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

/// True if relabeling voxel `index` away from its label leaves that label
/// nonempty and 4-connected. Assumes the label is currently 4-connected.
inline bool removal_keeps_connected(const LabelMap& labels, std::size_t index) {
  const GridDims dims = labels.dims();
  const std::uint32_t label = labels[index];
  std::vector<std::size_t> same;
  for_each_neighbor(coord_of(index, dims), dims, Connectivity::kFour, [&](Coord q) {
    const std::size_t j = linear_index(q, dims);
    if (labels[j] == label) same.push_back(j);
  });
  if (same.empty()) return false;  // sole voxel of its region
  if (same.size() == 1) return true;

  std::vector<std::uint8_t> seen(dims.size(), 0);
  seen[index] = 1;
  seen[same.front()] = 1;
  std::vector<std::size_t> stack{same.front()};
  std::size_t found = 1;
  while (!stack.empty() && found < same.size()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for_each_neighbor(coord_of(v, dims), dims, Connectivity::kFour, [&](Coord q) {
      const std::size_t j = linear_index(q, dims);
      if (seen[j] || labels[j] != label) return;
      seen[j] = 1;
      stack.push_back(j);
      if (std::find(same.begin(), same.end(), j) != same.end()) ++found;
    });
  }
  return found == same.size();
}

inline int contacts_with(const LabelMap& labels, std::size_t index, std::uint32_t other) {
  int n = 0;
  for_each_neighbor(coord_of(index, labels.dims()), labels.dims(), Connectivity::kFour,
                    [&](Coord q) { n += labels[q] == other; });
  return n;
}

inline bool touches_label(const LabelMap& labels, std::size_t index, std::uint32_t other) {
  return contacts_with(labels, index, other) > 0;
}

/// Labels 4-adjacent to `label`, ascending.
inline std::vector<std::uint32_t> adjacent_labels(const LabelMap& labels,
                                                  std::uint32_t label) {
  std::vector<std::uint32_t> out;
  const GridDims dims = labels.dims();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != label) continue;
    for_each_neighbor(coord_of(i, dims), dims, Connectivity::kFour, [&](Coord q) {
      const std::uint32_t m = labels[q];
      if (m != 0 && m != label) out.push_back(m);
    });
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Reattaches stray 4-connected pieces of each label to the neighboring
/// label they share the most edges with, until every label is 4-connected.
/// Each move merges a piece into an existing piece, so this terminates.
inline void merge_stray_pieces(LabelMap& labels, std::uint32_t k) {
  const GridDims dims = labels.dims();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t label = 1; label <= k; ++label) {
      auto pieces = label_pieces(labels, label);
      if (pieces.size() < 2) continue;
      // Keep the largest piece; earliest wins ties.
      std::size_t keep = 0;
      for (std::size_t p = 1; p < pieces.size(); ++p) {
        if (pieces[p].size() > pieces[keep].size()) keep = p;
      }
      for (std::size_t p = 0; p < pieces.size(); ++p) {
        if (p == keep) continue;
        std::vector<std::size_t> contacts(k + 1, 0);
        for (auto v : pieces[p]) {
          for_each_neighbor(coord_of(v, dims), dims, Connectivity::kFour, [&](Coord q) {
            const std::uint32_t m = labels[q];
            if (m != 0 && m != label) ++contacts[m];
          });
        }
        std::uint32_t best = 0;
        for (std::uint32_t m = 1; m <= k; ++m) {
          if (contacts[m] > (best == 0 ? 0 : contacts[best])) best = m;
        }
        if (best == 0) continue;  // isolated piece; only possible for a disconnected mask
        for (auto v : pieces[p]) labels[v] = best;
        changed = true;
      }
    }
  }
}

}  // namespace detail

/// Result of cutting: the label map and the cuts actually applied (anchors
/// may have been shifted along the centerline to obtain a clean split).
struct Partition {
  LabelMap labels;
  CutPlan cuts;
};

/// Cuts the region along `plan` and labels the pieces 1..k in centerline
/// order. Each cut's band goes to the piece behind it. A cut that does not
/// separate the part behind its anchor from the part ahead is retried with
/// the anchor moved +1, -1, +2, -2, ... up to floor(L / 4k) path positions.
inline Partition cut_regions(const BinaryMask& mask, const Path& path, const CutPlan& plan) {
  const GridDims dims = mask.dims();
  const auto k = static_cast<std::uint32_t>(plan.size() + 1);
  const std::size_t length = path.size();
  for (const Cut& cut : plan) {
    if (cut.index >= length || !(path[cut.index] == cut.anchor)) {
      fail(ErrorKind::kValidation, "cut anchor does not lie on the centerline");
    }
  }
  for (const Coord& c : path) {
    if (!in_bounds(c, dims) || !mask[c]) {
      fail(ErrorKind::kValidation, "centerline leaves the region");
    }
  }

  Partition out{LabelMap(dims, 0u), {}};
  BinaryMask working = mask;
  const std::size_t max_shift = length / (4 * static_cast<std::size_t>(k));
  std::size_t previous = 0;

  for (std::uint32_t j = 1; j < k; ++j) {
    const Cut& planned = plan[j - 1];
    bool done = false;
    for (std::size_t attempt = 0; attempt <= 2 * max_shift && !done; ++attempt) {
      // attempt 0, 1, 2, 3, 4 ... -> shift 0, +1, -1, +2, -2 ...
      const std::ptrdiff_t shift =
          attempt == 0 ? 0
                       : (attempt % 2 == 1 ? static_cast<std::ptrdiff_t>((attempt + 1) / 2)
                                           : -static_cast<std::ptrdiff_t>(attempt / 2));
      const std::ptrdiff_t signed_index = static_cast<std::ptrdiff_t>(planned.index) + shift;
      if (signed_index < 1 || signed_index + 1 >= static_cast<std::ptrdiff_t>(length)) continue;
      const auto index = static_cast<std::size_t>(signed_index);
      if (j > 1 && index <= previous) continue;
      const Coord anchor = path[index];
      if (!working[anchor]) continue;
      Vector2 normal;
      try {
        normal = normal_at(path, index);
      } catch (const Error&) {
        continue;
      }

      const auto band = cut_band(working, anchor, normal);
      BinaryMask rest = working;
      for (const Coord& c : band) rest[c] = 0;

      std::size_t behind = length;
      for (std::size_t i = 0; i < index; ++i) {
        if (rest[path[i]]) {
          behind = i;
          break;
        }
      }
      std::size_t ahead = length;
      for (std::size_t i = index + 1; i < length; ++i) {
        if (rest[path[i]]) {
          ahead = i;
          break;
        }
      }
      if (behind == length || ahead == length) continue;
      const auto comps = connected_components(rest, Connectivity::kFour);
      const std::uint32_t behind_comp = comps.labels[path[behind]];
      // The behind side must hold every remaining path voxel before the
      // anchor and none after it.
      bool clean = true;
      for (std::size_t i = behind; i < length && clean; ++i) {
        if (i == index || !rest[path[i]]) continue;
        clean = (comps.labels[path[i]] == behind_comp) == (i < index);
      }
      if (!clean) continue;

      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (comps.labels[i] == behind_comp) {
          out.labels[i] = j;
          rest[i] = 0;
        }
      }
      for (const Coord& c : band) out.labels[c] = j;
      working = std::move(rest);
      out.cuts.push_back(Cut{index, anchor, normal});
      previous = index;
      done = true;
    }
    if (!done) {
      fail(ErrorKind::kAlgorithm, "cut failed at segment " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < working.size(); ++i) {
    if (working[i]) out.labels[i] = k;
  }
  detail::merge_stray_pieces(out.labels, k);
  std::uint32_t last = 0;
  for (const Coord& c : path) {
    if (out.labels[c] < last) {
      fail(ErrorKind::kAlgorithm, "cut failed: regions out of order along the centerline");
    }
    last = out.labels[c];
  }
  return out;
}

inline LabelMap subdivide(const BinaryMask& mask, const Path& path, const CutPlan& plan) {
  return cut_regions(mask, path, plan).labels;
}

/// Equalizes region areas to T = floor(A / k):
///  1. coarse: the largest region sends its surplus along the region
///     adjacency graph to the nearest region below target, relayed through
///     the regions in between;
///  2. fine: the same routing, one voxel per region per step;
///  3. trim: A mod k voxels of region k are relabeled 0, highest arrival first.
/// A moved voxel is the donor voxel sharing the most edges with the receiver,
/// then the latest arrival. Every move keeps the donor 4-connected and, when
/// `path` is given, keeps labels non-decreasing along it.
inline LabelMap balance_areas(const LabelMap& input, int k, const ArrivalField& arrival,
                              const Path& path = {}) {
  if (k < 1) fail(ErrorKind::kValidation, "k must be at least 1");
  const auto kk = static_cast<std::uint32_t>(k);
  LabelMap labels = input;
  if (arrival.values.dims() != labels.dims()) {
    fail(ErrorKind::kValidation, "arrival field and label map dimensions differ");
  }

  std::vector<std::int64_t> area(kk + 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t l = labels[i];
    if (l == 0) continue;
    if (l > kk) fail(ErrorKind::kValidation, "label " + std::to_string(l) + " exceeds k");
    if (!std::isfinite(arrival.values[i])) {
      fail(ErrorKind::kValidation, "arrival undefined on a labeled voxel");
    }
    ++area[l];
  }
  for (std::uint32_t l = 1; l <= kk; ++l) {
    if (area[l] == 0) fail(ErrorKind::kValidation, "label " + std::to_string(l) + " is empty");
    if (detail::label_pieces(labels, l).size() != 1) {
      fail(ErrorKind::kValidation, "label " + std::to_string(l) + " is not 4-connected");
    }
  }

  std::vector<std::int64_t> path_pos(labels.size(), -1);
  for (std::size_t p = 0; p < path.size(); ++p) {
    if (!in_bounds(path[p], labels.dims())) fail(ErrorKind::kValidation, "path leaves the grid");
    path_pos[linear_index(path[p], labels.dims())] = static_cast<std::int64_t>(p);
  }
  auto keeps_order = [&](std::size_t i, std::uint32_t to) {
    const std::int64_t p = path_pos[i];
    if (p < 0) return true;
    const auto at = [&](std::int64_t q) { return labels[path[static_cast<std::size_t>(q)]]; };
    if (p > 0 && at(p - 1) > to) return false;
    return p + 1 == static_cast<std::int64_t>(path.size()) || at(p + 1) >= to;
  };

  const std::int64_t total = std::accumulate(area.begin(), area.end(), std::int64_t{0});
  const std::int64_t target = total / k;
  const std::int64_t remainder = total % k;
  auto goal = [&](std::uint32_t l) { return l == kk ? target + remainder : target; };

  // Candidate for moving one voxel from `from` to `to`: among donor voxels
  // bordering `to` whose removal keeps `from` connected, the one sharing the
  // most edges with `to`, then the largest arrival time, then the smallest
  // row-major index.
  auto find_move = [&](std::uint32_t from, std::uint32_t to) {
    std::size_t pick = labels.size();
    int pick_contacts = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != from) continue;
      const int contacts = detail::contacts_with(labels, i, to);
      if (contacts == 0 || !keeps_order(i, to)) continue;
      if (pick != labels.size() &&
          (contacts < pick_contacts ||
           (contacts == pick_contacts && arrival.values[i] <= arrival.values[pick]))) {
        continue;
      }
      if (!detail::removal_keeps_connected(labels, i)) continue;
      pick = i;
      pick_contacts = contacts;
    }
    return pick;
  };
  auto move_one = [&](std::uint32_t from, std::uint32_t to) {
    const std::size_t pick = find_move(from, to);
    if (pick == labels.size()) return false;
    labels[pick] = to;
    --area[from];
    ++area[to];
    return true;
  };

  auto adjacency = [&] {
    std::vector<std::vector<std::uint32_t>> graph(kk + 1);
    for (std::uint32_t l = 1; l <= kk; ++l) graph[l] = detail::adjacent_labels(labels, l);
    return graph;
  };
  // Shortest chain of regions from `donor` to the nearest region below its
  // goal, using only adjacencies that currently admit a move. Empty if none.
  auto route_from = [&](std::uint32_t donor,
                        const std::vector<std::vector<std::uint32_t>>& graph) {
    std::vector<std::int8_t> usable((kk + 1) * (kk + 1), -1);
    auto can_move = [&](std::uint32_t from, std::uint32_t to) {
      auto& slot = usable[from * (kk + 1) + to];
      if (slot < 0) slot = find_move(from, to) != labels.size();
      return slot == 1;
    };
    std::vector<std::uint32_t> parent(kk + 1, 0);
    std::vector<std::uint8_t> visited(kk + 1, 0);
    std::vector<std::uint32_t> queue{donor};
    visited[donor] = 1;
    std::uint32_t receiver = 0;
    for (std::size_t head = 0; head < queue.size() && receiver == 0; ++head) {
      for (auto m : graph[queue[head]]) {
        if (visited[m] || !can_move(queue[head], m)) continue;
        visited[m] = 1;
        parent[m] = queue[head];
        if (area[m] < goal(m)) {
          receiver = m;
          break;
        }
        queue.push_back(m);
      }
    }
    std::vector<std::uint32_t> route;
    if (receiver == 0) return route;
    route.push_back(receiver);
    while (route.back() != donor) route.push_back(parent[route.back()]);
    std::reverse(route.begin(), route.end());
    return route;
  };

  // Coarse phase: the largest region pushes as much of its surplus as the
  // nearest under-target region can absorb, relayed along the route.
  for (int round = 0; round < 10 * k && kk > 1; ++round) {
    std::uint32_t largest = 1;
    for (std::uint32_t l = 2; l <= kk; ++l) {
      if (area[l] > area[largest]) largest = l;
    }
    if (area[largest] <= goal(largest)) break;
    const auto route = route_from(largest, adjacency());
    if (route.empty()) break;
    std::int64_t amount =
        std::min(area[largest] - goal(largest), goal(route.back()) - area[route.back()]);
    for (std::size_t e = 0; e + 1 < route.size() && amount > 0; ++e) {
      std::int64_t moved = 0;
      while (moved < amount && move_one(route[e], route[e + 1])) ++moved;
      amount = moved;
    }
    if (amount == 0) break;
  }

  // Fine phase: one voxel per region along the route per step.
  const int max_steps = 100 * k;
  int steps = 0;
  auto balanced = [&] {
    for (std::uint32_t l = 1; l <= kk; ++l) {
      if (area[l] != goal(l)) return false;
    }
    return true;
  };
  auto report = [&] {
    std::string s = "balance failed; areas:";
    for (std::uint32_t l = 1; l <= kk; ++l) s += " " + std::to_string(area[l]);
    return s;
  };
  while (!balanced()) {
    if (steps >= max_steps) fail(ErrorKind::kAlgorithm, report());
    ++steps;

    const auto graph = adjacency();
    // Donors by decreasing excess, then label.
    std::vector<std::uint32_t> donors;
    for (std::uint32_t l = 1; l <= kk; ++l) {
      if (area[l] > goal(l)) donors.push_back(l);
    }
    std::stable_sort(donors.begin(), donors.end(), [&](auto a, auto b) {
      return area[a] - goal(a) > area[b] - goal(b);
    });

    bool progressed = false;
    for (auto donor : donors) {
      const auto route = route_from(donor, graph);
      for (std::size_t e = 0; e + 1 < route.size(); ++e) {
        if (!move_one(route[e], route[e + 1])) break;
        progressed = true;
      }
      if (progressed) break;
    }
    if (!progressed) fail(ErrorKind::kAlgorithm, report());
  }

  // Trim.
  for (std::int64_t n = 0; n < remainder; ++n) {
    std::size_t pick = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != kk) continue;
      if (pick != labels.size() && arrival.values[i] <= arrival.values[pick]) continue;
      if (!detail::removal_keeps_connected(labels, i)) continue;
      pick = i;
    }
    if (pick == labels.size()) fail(ErrorKind::kAlgorithm, "balance failed; cannot trim region k");
    labels[pick] = 0;
  }
  return labels;
}

struct SubdivisionOptions {
  CenterlineOptions centerline;
  bool balance = true;
};

/// Everything the pipeline computed, for inspection and dumping.
struct SubdivisionResult {
  Centerline centerline;
  CutPlan cuts;
  LabelMap labels;
};

inline SubdivisionResult run_subdivision(const BinaryMask& mask, int k,
                                         const SubdivisionOptions& options = {}) {
  if (k < 1) fail(ErrorKind::kValidation, "k must be at least 1");
  Centerline centerline = extract_centerline(mask, options.centerline);
  const CutPlan plan = sample_cut_points(centerline.path, k);
  Partition partition = cut_regions(mask, centerline.path, plan);
  LabelMap labels = options.balance
                        ? balance_areas(partition.labels, k, centerline.arrival, centerline.path)
                        : std::move(partition.labels);
  return SubdivisionResult{std::move(centerline), std::move(partition.cuts),
                           std::move(labels)};
}

/// k equal-area, 4-connected regions following the shape of `mask`.
inline LabelMap subdivide_equal(const BinaryMask& mask, int k,
                                const SubdivisionOptions& options = {}) {
  return run_subdivision(mask, k, options).labels;
}

}  // namespace sroi
