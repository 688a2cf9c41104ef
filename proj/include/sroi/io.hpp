#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "sroi/eikonal.hpp"
#include "sroi/grid.hpp"
#include "sroi/subdivision.hpp"

namespace sroi {

/// Decoded portable graymap: dimensions, maxval and raw samples.
struct Graymap {
  GridDims dims;
  std::uint32_t maxval = 0;
  std::vector<std::uint32_t> samples;
};

namespace detail {

class PnmCursor {
 public:
  explicit PnmCursor(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::kParse, "graymap: " + what + " at byte offset " + std::to_string(pos_));
  }

  // Skips whitespace and '#' comments (which run to end of line).
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space();
    if (pos_ >= bytes_.size()) error(std::string("unexpected end of data reading ") + what);
    std::uint64_t value = 0;
    const char* first = bytes_.data() + pos_;
    const char* last = bytes_.data() + bytes_.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) error(std::string(what) + " out of range");
    if (ec != std::errc() || ptr == first) error(std::string("expected ") + what);
    if (ptr != last && !is_space(*ptr) && *ptr != '#') {
      error(std::string("malformed ") + what);
    }
    pos_ = static_cast<std::size_t>(ptr - bytes_.data());
    return value;
  }

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      error("truncated payload (need " + std::to_string(n) + " bytes, have " +
            std::to_string(bytes_.size() - pos_) + ")");
    }
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  char get() {
    if (pos_ >= bytes_.size()) error("unexpected end of data");
    return bytes_[pos_++];
  }

  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a plain (P2) or raw (P5) portable graymap.
inline Graymap read_graymap(std::string_view bytes) {
  detail::PnmCursor in(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    in.error("missing P2/P5 magic number");
  }
  const bool raw = bytes[1] == '5';
  in.take(2);

  const auto width = in.number("width");
  const auto height = in.number("height");
  const auto maxval = in.number("maxval");
  if (maxval < 1 || maxval > 65535) {
    in.error("maxval " + std::to_string(maxval) + " outside 1..65535");
  }
  if (width < 1 || height < 1) in.error("zero image dimension");
  Graymap out;
  try {
    out.dims = GridDims::checked(static_cast<std::int64_t>(std::min<std::uint64_t>(width, 1u << 30)),
                                 static_cast<std::int64_t>(std::min<std::uint64_t>(height, 1u << 30)));
  } catch (const Error& e) {
    in.error(e.what());
  }
  out.maxval = static_cast<std::uint32_t>(maxval);
  out.samples.resize(out.dims.size());

  if (raw) {
    // Exactly one whitespace byte separates the header from the payload.
    if (!detail::PnmCursor::is_space(in.get())) in.error("expected whitespace after maxval");
    const std::size_t per_sample = maxval < 256 ? 1 : 2;
    const auto payload = in.take(out.samples.size() * per_sample);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      std::uint32_t v;
      if (per_sample == 1) {
        v = static_cast<unsigned char>(payload[i]);
      } else {
        v = (static_cast<std::uint32_t>(static_cast<unsigned char>(payload[2 * i])) << 8) |
            static_cast<unsigned char>(payload[2 * i + 1]);
      }
      if (v > maxval) in.error("sample " + std::to_string(v) + " exceeds maxval");
      out.samples[i] = v;
    }
  } else {
    for (auto& s : out.samples) {
      const auto v = in.number("sample");
      if (v > maxval) in.error("sample " + std::to_string(v) + " exceeds maxval");
      s = static_cast<std::uint32_t>(v);
    }
  }
  return out;
}

/// Nonzero sample -> region voxel.
inline BinaryMask read_mask(std::string_view bytes) {
  const Graymap g = read_graymap(bytes);
  BinaryMask mask(g.dims, 0);
  for (std::size_t i = 0; i < g.samples.size(); ++i) mask[i] = g.samples[i] != 0;
  return mask;
}

/// Sample values are taken as labels verbatim.
inline LabelMap read_labelmap(std::string_view bytes) {
  const Graymap g = read_graymap(bytes);
  return LabelMap(g.dims, g.samples);
}

namespace detail {

inline std::string write_plain_graymap(GridDims dims, std::uint32_t maxval,
                                       const std::vector<std::uint32_t>& samples) {
  std::string out = "P2\n" + std::to_string(dims.width) + " " + std::to_string(dims.height) +
                    "\n" + std::to_string(maxval) + "\n";
  out.reserve(out.size() + samples.size() * 3);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      if (x > 0) out += ' ';
      out += std::to_string(samples[linear_index(Coord{x, y}, dims)]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// Canonical P2 output: header lines "P2", "<w> <h>", "<maxval>", then one
/// line per row with single-space separated samples.
inline std::string write_labelmap(const LabelMap& labels) {
  std::uint32_t top = 0;
  for (auto v : labels.data()) top = std::max(top, v);
  if (top > 65535) {
    fail(ErrorKind::kValidation, "label " + std::to_string(top) + " exceeds 65535");
  }
  return detail::write_plain_graymap(labels.dims(), std::max(top, 1u), labels.data());
}

/// Masks are written as P2 with maxval 1.
inline std::string write_mask(const BinaryMask& mask) {
  std::vector<std::uint32_t> samples(mask.data().begin(), mask.data().end());
  for (auto& s : samples) s = s != 0;
  return detail::write_plain_graymap(mask.dims(), 1, samples);
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// One line per row, comma separated, shortest round-trip formatting,
/// "inf" for unreached voxels.
inline std::string write_field_csv(const ScalarField& field) {
  std::string out;
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      if (x > 0) out += ',';
      out += format_double(field[Coord{x, y}]);
    }
    out += '\n';
  }
  return out;
}

inline ScalarField read_field_csv(std::string_view text) {
  std::vector<double> values;
  std::int64_t width = -1;
  std::int64_t height = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::int64_t cols = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                           : comma - start);
      double v = 0.0;
      if (cell == "inf") {
        v = kInfinity;
      } else {
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
          fail(ErrorKind::kParse, "csv: bad number '" + std::string(cell) + "' on line " +
                                      std::to_string(height + 1));
        }
      }
      values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (width < 0) width = cols;
    if (cols != width) {
      fail(ErrorKind::kParse, "csv: ragged row " + std::to_string(height + 1));
    }
    ++height;
    pos = eol + 1;
  }
  if (height == 0) fail(ErrorKind::kParse, "csv: empty input");
  return ScalarField(GridDims::checked(width, height), std::move(values));
}

/// "x,y" per line, in path order.
inline std::string write_path_csv(const Path& path) {
  std::string out;
  for (const Coord& c : path) {
    out += std::to_string(c.x) + "," + std::to_string(c.y) + "\n";
  }
  return out;
}

/// "index,anchor_x,anchor_y,normal_dx,normal_dy" per line.
inline std::string write_cuts_csv(const CutPlan& cuts) {
  std::string out;
  for (const Cut& c : cuts) {
    out += std::to_string(c.index) + "," + std::to_string(c.anchor.x) + "," +
           std::to_string(c.anchor.y) + "," + format_double(c.normal.dx) + "," +
           format_double(c.normal.dy) + "\n";
  }
  return out;
}

struct RegionStats {
  std::uint32_t label = 0;
  std::int64_t area = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  Coord bbox_min;
  Coord bbox_max;
};

/// One record per nonzero label, ascending.
inline std::vector<RegionStats> region_stats(const LabelMap& labels) {
  std::uint32_t top = 0;
  for (auto v : labels.data()) top = std::max(top, v);
  std::vector<RegionStats> acc(top + 1);
  std::vector<std::int64_t> sum_x(top + 1, 0);
  std::vector<std::int64_t> sum_y(top + 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t l = labels[i];
    if (l == 0) continue;
    const Coord c = coord_of(i, labels.dims());
    RegionStats& r = acc[l];
    if (r.area == 0) {
      r.bbox_min = c;
      r.bbox_max = c;
    }
    ++r.area;
    sum_x[l] += c.x;
    sum_y[l] += c.y;
    r.bbox_min = Coord{std::min(r.bbox_min.x, c.x), std::min(r.bbox_min.y, c.y)};
    r.bbox_max = Coord{std::max(r.bbox_max.x, c.x), std::max(r.bbox_max.y, c.y)};
  }
  std::vector<RegionStats> out;
  for (std::uint32_t l = 1; l <= top; ++l) {
    RegionStats r = acc[l];
    if (r.area == 0) continue;
    r.label = l;
    r.centroid_x = static_cast<double>(sum_x[l]) / static_cast<double>(r.area);
    r.centroid_y = static_cast<double>(sum_y[l]) / static_cast<double>(r.area);
    out.push_back(r);
  }
  return out;
}

/// JSON lines: {"label":..,"area":..,"centroid":[x,y],"bbox":[x0,y0,x1,y1]}
inline std::string write_stats_jsonl(const std::vector<RegionStats>& stats) {
  std::string out;
  for (const auto& r : stats) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["area"] = r.area;
    j["centroid"] = {r.centroid_x, r.centroid_y};
    j["bbox"] = {r.bbox_min.x, r.bbox_min.y, r.bbox_max.x, r.bbox_max.y};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sroi
