// Vanishing-point encoding (quadrant + binary baseline) and decoding from a
// 5-channel confidence map. Channel order is [absence, Q1, Q2, Q3, Q4]:
// Q1 lower-right, Q2 lower-left, Q3 upper-right, Q4 upper-left.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "vpgrid/core.hpp"

namespace vpg {

inline constexpr int kVppChannels = 5;

// H x W lattice of channel indices in {0=absence, 1..4=quadrant}.
struct QuadrantMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  QuadrantMask() = default;
  QuadrantMask(int h, int w)
      : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0u) {}

  std::uint8_t& at(int y, int x) {
    return cells[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const QuadrantMask&) const = default;
};

struct VpDecodeResult {
  Cell location;        // lattice coordinates
  double existence = 0; // 1 - mean(p_0)
  double p_avg = 0;     // existence / 4
};

// Cells on the VP row/column go to the lower-index eligible quadrant
// (the <= comparisons below).
inline QuadrantMask encode_quadrant(const std::optional<PixelPoint>& vp,
                                    const ImageSize& size) {
  size.validate();
  QuadrantMask mask(size.grid_height(), size.grid_width());
  if (!vp) return mask;
  const Cell v = pixel_to_cell(*vp, size);  // throws if out of bounds
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const bool right = x > v.x, below = y > v.y;
      std::uint8_t q;
      if (right && below) q = 1;
      else if (!right && below) q = 2;
      else if (right) q = 3;
      else q = 4;
      mask.at(y, x) = q;
    }
  }
  return mask;
}

// Binary VPP baseline: foreground = cells whose centers lie within `radius`
// pixels of the VP.
inline GridMask encode_binary(const std::optional<PixelPoint>& vp,
                              double radius, const ImageSize& size) {
  size.validate();
  if (radius <= 0) throw ValidationError("radius must be positive");
  GridMask mask = GridMask::for_size(size);
  if (!vp) return mask;
  if (!size.contains_pixel(vp->x, vp->y))
    throw ValidationError("vp outside image bounds");
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const PixelPoint c = cell_center({x, y}, size);
      if (std::hypot(c.x - vp->x, c.y - vp->y) <= radius)
        mask.at(y, x) = 1u;
    }
  }
  return mask;
}

// One-hot 5-channel map of a quadrant mask.
inline ConfidenceMap one_hot(const QuadrantMask& mask) {
  ConfidenceMap map(kVppChannels, mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      map.at(mask.at(y, x), y, x) = 1.0f;
  return map;
}

namespace detail {
inline void check_vpp_shape(const ConfidenceMap& map) {
  if (map.channels != kVppChannels)
    throw ValidationError("VPP map must have exactly 5 channels");
  if (map.height <= 0 || map.width <= 0)
    throw ValidationError("VPP map must be non-empty");
}

// Quadrant-channel averages over the 2x2 window {x,x+1} x {y,y+1}. The four
// quadrants of an ideal encoding meet exactly at the VP cell's window, so
// the averages there are all 1/4 and the decoding objective attains its
// unique zero. Samples one past the right or bottom lattice edge reuse the
// edge cell's values with the quadrant channels pushed by the encoding rule
// itself (a column right of the lattice is "right" of any in-bounds VP, a
// row below it is "below"); this keeps the window informative when the VP
// sits in the last lattice row or column. Interior windows are untouched,
// so a uniform map still scores the same objective at every interior cell.
inline std::array<double, 4> window_quadrants(const ConfidenceMap& map, int y,
                                              int x) {
  std::array<double, 4> sum{};
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int yy = y + dy, xx = x + dx;
      const int cy = std::min(yy, map.height - 1);
      const int cx = std::min(xx, map.width - 1);
      for (int n = 1; n <= 4; ++n) {
        bool right = n == 1 || n == 3;
        bool below = n == 1 || n == 2;
        if (xx >= map.width) right = true;
        if (yy >= map.height) below = true;
        const int target = right ? (below ? 1 : 3) : (below ? 2 : 4);
        sum[static_cast<std::size_t>(target - 1)] += map.at(n, cy, cx);
      }
    }
  }
  for (double& s : sum) s /= 4.0;
  return sum;
}
}  // namespace detail

// P_avg = (1 - sum(p_0)/(m*n)) / 4
inline double p_avg(const ConfidenceMap& map) {
  detail::check_vpp_shape(map);
  double sum = 0;
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) sum += map.at(0, y, x);
  return (1.0 - sum / (static_cast<double>(map.height) * map.width)) / 4.0;
}

// Location = row-major-first argmin over cells of sum_{n=1..4}
// (P_avg - p_n)^2, with p_n taken as a local window average so the
// objective is informative on hard (one-hot) maps too.
inline VpDecodeResult decode_vp(const ConfidenceMap& map) {
  detail::check_vpp_shape(map);
  map.validate_finite();
  const double avg = p_avg(map);

  VpDecodeResult result;
  result.p_avg = avg;
  result.existence = 4.0 * avg;

  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double obj = 0;
      for (const double p : detail::window_quadrants(map, y, x)) {
        const double d = avg - p;
        obj += d * d;
      }
      if (obj < best) {
        best = obj;
        result.location = {x, y};
      }
    }
  }
  return result;
}

}  // namespace vpg
