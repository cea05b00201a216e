// Lane post-processing: peak sampling, VP-derived inverse perspective
// mapping, sequential bin-stack clustering, and quadratic lane fitting.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "vpgrid/core.hpp"

namespace vpg {

struct LanePoint {
  PixelPoint pos;  // image coordinates (cell center)
  double score = 0;
  int label_id = 0;
};

// 3x3 invertible matrix, row-major.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  PixelPoint apply(PixelPoint p) const {
    const double u = m[0] * p.x + m[1] * p.y + m[2];
    const double v = m[3] * p.x + m[4] * p.y + m[5];
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    if (std::abs(w) < 1e-12)
      throw ValidationError("point maps to infinity under homography");
    return {u / w, v / w};
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  void validate() const {
    if (std::abs(det()) <= 1e-9)
      throw ValidationError("homography is numerically singular");
  }
};

namespace detail {

// In-place Gaussian elimination with partial pivoting; throws on a
// near-singular system.
template <int N>
std::array<double, N> solve_linear(std::array<std::array<double, N + 1>, N> a) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      throw ValidationError("singular linear system");
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= N; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::array<double, N> x{};
  for (int i = 0; i < N; ++i) x[i] = a[i][N] / a[i][i];
  return x;
}

}  // namespace detail

// Homography mapping four source points onto four destination points.
inline Homography homography_from_quad(const std::array<PixelPoint, 4>& src,
                                       const std::array<PixelPoint, 4>& dst) {
  std::array<std::array<double, 9>, 8> sys{};
  for (int i = 0; i < 4; ++i) {
    const auto& s = src[i];
    const auto& d = dst[i];
    sys[2 * i] = {s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y, d.x};
    sys[2 * i + 1] = {0, 0, 0, s.x, s.y, 1, -d.y * s.x, -d.y * s.y, d.y};
  }
  const auto h = detail::solve_linear<8>(sys);
  Homography out;
  for (int i = 0; i < 8; ++i) out.m[static_cast<std::size_t>(i)] = h[i];
  out.m[8] = 1.0;
  out.validate();
  return out;
}

// Bird's-eye homography from the decoded VP. The source trapezoid spans the
// image's bottom corners and the intersections of the corner->VP rays with
// the row y = near_y, so every image line through the VP becomes a vertical
// line in the bird's-eye view and the horizon row y = vp.y is pushed to
// infinity. The destination rectangle keeps the trapezoid's top width:
// lateral bird's-eye units then match pixels at the far end of the road,
// where peaks sit closest together, instead of magnifying the lattice
// quantization jitter there by a large factor.
inline Homography ipm_from_vp(PixelPoint vp, const ImageSize& size,
                              double near_y) {
  size.validate();
  if (!(vp.y < near_y && near_y < size.height))
    throw ValidationError("need vp.y < near_y < image height");
  const double yb = size.height - 1.0;
  const double t = (yb - near_y) / (yb - vp.y);
  const PixelPoint bl{0.0, yb}, br{size.width - 1.0, yb};
  const PixelPoint tl{bl.x + t * (vp.x - bl.x), near_y};
  const PixelPoint tr{br.x + t * (vp.x - br.x), near_y};
  const double w = tr.x - tl.x;
  const std::array<PixelPoint, 4> src{tl, tr, br, bl};
  const std::array<PixelPoint, 4> dst{PixelPoint{0.0, 0.0}, PixelPoint{w, 0.0},
                                      PixelPoint{w, yb}, PixelPoint{0.0, yb}};
  return homography_from_quad(src, dst);
}

// Per-row 1-D non-maximum suppression (window +-1 cell, leftmost wins on
// plateaus). `map` holds the 8 lane channels in taxonomy order.
inline std::vector<LanePoint> sample_peaks(const ConfidenceMap& map,
                                           double threshold,
                                           const ImageSize& size) {
  if (!(threshold > 0 && threshold < 1))
    throw ValidationError("threshold must lie in (0,1)");
  std::vector<LanePoint> out;
  for (int c = 0; c < map.channels; ++c) {
    label_by_id(c);
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) {
        const float v = map.at(c, y, x);
        if (v < threshold) continue;
        if (x > 0 && !(v > map.at(c, y, x - 1))) continue;
        if (x + 1 < map.width && !(v >= map.at(c, y, x + 1))) continue;
        out.push_back({cell_center({x, y}, size), v, c});
      }
    }
  }
  return out;
}

// Sequential bin-stack clustering: points in increasing vertical order join
// the bin whose most recently stacked point is nearest and within
// dist_threshold; otherwise they open a new bin. Returns index lists into
// `points`.
inline std::vector<std::vector<int>> cluster_points(
    const std::vector<PixelPoint>& points, double dist_threshold) {
  if (!(dist_threshold > 0))
    throw ValidationError("dist_threshold must be positive");
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return points[a].y < points[b].y; });

  std::vector<std::vector<int>> bins;
  for (int idx : order) {
    const PixelPoint& p = points[idx];
    int best_bin = -1;
    double best_dist = dist_threshold;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const PixelPoint& top = points[bins[b].back()];
      const double d = std::hypot(p.x - top.x, p.y - top.y);
      if (d <= best_dist) {
        best_dist = d;
        best_bin = static_cast<int>(b);
      }
    }
    if (best_bin < 0) {
      bins.emplace_back();
      best_bin = static_cast<int>(bins.size()) - 1;
    }
    bins[static_cast<std::size_t>(best_bin)].push_back(idx);
  }
  return bins;
}

// Classified quadratic x = a*y^2 + b*y + c in image coordinates.
struct LaneCurve {
  double a = 0, b = 0, c = 0;
  int label_id = 0;
  std::vector<LanePoint> support;
  double y_near = 0;  // largest support y (closest to the camera)
  double y_far = 0;   // smallest support y

  double x_at(double y) const { return (a * y + b) * y + c; }
};

// Least-squares quadratic over the cluster's image points. When the
// cluster's farthest point (smallest y) lies within vp_attach_radius of the
// VP, the VP itself is appended as a fitting point to stabilize the curve
// near the horizon.
inline LaneCurve fit_lane(const std::vector<LanePoint>& cluster,
                          const std::optional<PixelPoint>& vp,
                          double vp_attach_radius) {
  if (cluster.size() < 3)
    throw ValidationError("lane fit needs at least 3 points");

  std::vector<PixelPoint> pts;
  pts.reserve(cluster.size() + 1);
  for (const auto& p : cluster) pts.push_back(p.pos);
  if (vp) {
    const auto farthest = *std::min_element(
        pts.begin(), pts.end(),
        [](const PixelPoint& a, const PixelPoint& b) { return a.y < b.y; });
    if (std::hypot(farthest.x - vp->x, farthest.y - vp->y) <= vp_attach_radius)
      pts.push_back(*vp);
  }

  // normal equations for x = a*y^2 + b*y + c
  std::array<std::array<double, 4>, 3> sys{};
  for (const auto& p : pts) {
    const std::array<double, 3> basis{p.y * p.y, p.y, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) sys[r][c] += basis[r] * basis[c];
      sys[r][3] += basis[r] * p.x;
    }
  }
  std::array<double, 3> coeffs;
  try {
    coeffs = detail::solve_linear<3>(sys);
  } catch (const ValidationError&) {
    throw ValidationError("rank-deficient lane fit (all points on one row?)");
  }

  LaneCurve curve;
  curve.a = coeffs[0];
  curve.b = coeffs[1];
  curve.c = coeffs[2];
  curve.support = cluster;
  curve.y_near = -std::numeric_limits<double>::infinity();
  curve.y_far = std::numeric_limits<double>::infinity();
  std::map<int, double> label_score;
  std::map<int, int> label_count;
  for (const auto& p : cluster) {
    curve.y_near = std::max(curve.y_near, p.pos.y);
    curve.y_far = std::min(curve.y_far, p.pos.y);
    label_score[p.label_id] += p.score;
    ++label_count[p.label_id];
  }
  int best = cluster.front().label_id;
  for (const auto& [id, n] : label_count)
    if (n > label_count[best] ||
        (n == label_count[best] && label_score[id] > label_score[best]))
      best = id;
  curve.label_id = best;
  return curve;
}

struct LaneExtractConfig {
  double peak_threshold = 0.5;
  double cluster_dist = 12.0;      // bird's-eye units, 1.5 cell widths
  double vp_attach_radius = 20.0;  // pixels
  double ipm_margin = 24.0;        // trapezoid top = vp.y + margin (3 cells)
  std::size_t min_cluster_size = 3;
  double merge_overlap = 0.5;      // support overlap triggering a merge
};

namespace detail {

inline double mean_score(const LaneCurve& curve) {
  double s = 0;
  for (const auto& p : curve.support) s += p.score;
  return curve.support.empty() ? 0.0 : s / curve.support.size();
}

inline double support_overlap(const LaneCurve& a, const LaneCurve& b) {
  std::set<std::pair<double, double>> sa;
  for (const auto& p : a.support) sa.insert({p.pos.x, p.pos.y});
  std::size_t shared = 0;
  for (const auto& p : b.support) shared += sa.count({p.pos.x, p.pos.y});
  const std::size_t smaller = std::min(a.support.size(), b.support.size());
  return smaller == 0 ? 0.0 : static_cast<double>(shared) / smaller;
}

}  // namespace detail

// Full lane pipeline: peaks -> IPM -> bin-stack clustering -> per-cluster
// quadratic fit in image coordinates -> cross-channel duplicate merge.
inline std::vector<LaneCurve> extract_lanes(
    const ConfidenceMap& map, const std::optional<PixelPoint>& vp,
    const ImageSize& size, const LaneExtractConfig& config = {}) {
  const std::vector<LanePoint> all_peaks =
      sample_peaks(map, config.peak_threshold, size);

  std::optional<Homography> ipm;
  if (vp && vp.value().y + config.ipm_margin < size.height - 1)
    ipm = ipm_from_vp(*vp, size, vp->y + config.ipm_margin);

  std::vector<LaneCurve> curves;
  for (int c = 0; c < map.channels; ++c) {
    std::vector<LanePoint> peaks;
    for (const auto& p : all_peaks)
      if (p.label_id == c) {
        // points on or above the horizon have no bird's-eye image
        if (ipm && p.pos.y <= vp->y + 1.0) continue;
        peaks.push_back(p);
      }
    if (peaks.size() < config.min_cluster_size) continue;

    // the bird's-eye view separates the lanes laterally (lines through the
    // VP become parallel verticals); the vertical coordinate keeps the image
    // row, since the projective stretch near the horizon would tear apart
    // an evenly spaced lattice chain
    std::vector<PixelPoint> bev(peaks.size());
    for (std::size_t i = 0; i < peaks.size(); ++i)
      bev[i] = ipm ? PixelPoint{ipm->apply(peaks[i].pos).x, peaks[i].pos.y}
                   : peaks[i].pos;

    for (const auto& bin : cluster_points(bev, config.cluster_dist)) {
      if (bin.size() < config.min_cluster_size) continue;
      std::vector<LanePoint> cluster;
      cluster.reserve(bin.size());
      for (int idx : bin) cluster.push_back(peaks[static_cast<std::size_t>(idx)]);
      try {
        curves.push_back(fit_lane(cluster, vp, config.vp_attach_radius));
      } catch (const ValidationError&) {
        // degenerate cluster (single row); drop it
      }
    }
  }

  // cross-channel duplicate merge: overlapping supports keep the
  // higher-scoring curve
  std::vector<LaneCurve> merged;
  for (auto& curve : curves) {
    bool absorbed = false;
    for (auto& kept : merged) {
      if (detail::support_overlap(kept, curve) >= config.merge_overlap) {
        if (detail::mean_score(curve) > detail::mean_score(kept)) kept = curve;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(std::move(curve));
  }
  return merged;
}

}  // namespace vpg
