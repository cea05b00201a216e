// Pixel-polygon -> grid-mask encoding and horizontal flip augmentation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "vpgrid/core.hpp"

namespace vpg {
namespace detail {

struct Vec2i {
  long long x = 0;
  long long y = 0;
};

// 8-connected Bresenham between integer endpoints.
template <typename Fn>
void rasterize_segment(Vec2i a, Vec2i b, Fn&& emit) {
  long long dx = std::llabs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  long long dy = -std::llabs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  long long err = dx + dy;
  for (;;) {
    emit(a.x, a.y);
    if (a.x == b.x && a.y == b.y) break;
    long long e2 = 2 * err;
    if (e2 >= dy) { err += dy; a.x += sx; }
    if (e2 <= dx) { err += dx; a.y += sy; }
  }
}

// Even-odd ray cast at integer point (px,py); exact integer arithmetic.
// Points exactly on an edge are handled separately by edge rasterization.
inline bool point_in_polygon_evenodd(long long px, long long py,
                                     const std::vector<Vec2i>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > py) != (b.y > py)) {
      // px < a.x + (b.x-a.x)*(py-a.y)/(b.y-a.y), compared without division
      long long lhs = (px - a.x) * (b.y - a.y);
      long long rhs = (b.x - a.x) * (py - a.y);
      if (b.y - a.y < 0) { lhs = -lhs; rhs = -rhs; }
      if (lhs < rhs) inside = !inside;
    }
  }
  return inside;
}

// Emits every covered pixel of an annotation shape: single points, 2-vertex
// polylines (8-connected), and >=3-vertex polygons (even-odd fill + outline).
template <typename Fn>
void rasterize_shape(const std::vector<PixelPoint>& polygon, Fn&& emit) {
  if (polygon.empty()) throw ValidationError("empty polygon");
  std::vector<Vec2i> pts;
  pts.reserve(polygon.size());
  for (const auto& p : polygon)
    pts.push_back({std::llround(p.x), std::llround(p.y)});

  if (pts.size() == 1) {
    emit(pts[0].x, pts[0].y);
    return;
  }
  if (pts.size() == 2) {
    rasterize_segment(pts[0], pts[1], emit);
    return;
  }

  long long x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
  }
  for (long long y = y0; y <= y1; ++y)
    for (long long x = x0; x <= x1; ++x)
      if (point_in_polygon_evenodd(x, y, pts)) emit(x, y);
  for (std::size_t i = 0; i < pts.size(); ++i)
    rasterize_segment(pts[i], pts[(i + 1) % pts.size()], emit);
}

}  // namespace detail

// Marks the label of every polygon in each lattice cell that contains at
// least one rasterized pixel of that polygon.
inline GridMask encode_grid(const FrameAnnotation& ann, const ImageSize& size) {
  size.validate();
  GridMask mask = GridMask::for_size(size);
  for (const auto& obj : ann.objects) {
    label_by_id(obj.label_id);
    detail::rasterize_shape(obj.polygon, [&](long long px, long long py) {
      if (px < 0 || py < 0 || px >= size.width || py >= size.height)
        throw ValidationError("polygon pixel outside image bounds");
      mask.set_label(static_cast<int>(py) / size.grid,
                     static_cast<int>(px) / size.grid, obj.label_id);
    });
  }
  return mask;
}

// x -> width-1-x on every vertex and the VP; left/right arrow labels swap.
inline FrameAnnotation flip_horizontal(const FrameAnnotation& ann,
                                       const ImageSize& size) {
  const int left_id = label_by_name("left_arrow").id;
  const int right_id = label_by_name("right_arrow").id;
  FrameAnnotation out = ann;
  for (auto& obj : out.objects) {
    for (auto& v : obj.polygon) v.x = size.width - 1 - v.x;
    if (obj.label_id == left_id) obj.label_id = right_id;
    else if (obj.label_id == right_id) obj.label_id = left_id;
  }
  if (out.vp) out.vp->x = size.width - 1 - out.vp->x;
  return out;
}

}  // namespace vpg
