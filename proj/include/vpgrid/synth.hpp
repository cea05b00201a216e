// Synthetic road scenes with exact ground truth: flat-ground pinhole
// projection of quadratic lanes and rectangular markings, Gaussian-profiled
// confidence ridges, seeded noise. Serves as the independent oracle for the
// post-processing pipeline and the metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "vpgrid/annotation.hpp"
#include "vpgrid/core.hpp"
#include "vpgrid/lane_post.hpp"
#include "vpgrid/marking_post.hpp"
#include "vpgrid/metrics.hpp"
#include "vpgrid/vpp.hpp"

namespace vpg {

struct LaneSpec {
  double offset = 0;     // lateral position at z = 0, ground units (m)
  double curvature = 0;  // lateral offset grows as curvature * z^2
  double width = 0.08;   // painted line width (m)
  int label_id = 1;      // dashed_white
};

struct MarkingRectSpec {
  double x0 = 0, z0 = 0, x1 = 0, z1 = 0;  // ground-plane rectangle (m)
  int label_id = 11;                      // straight_arrow
};

struct SceneSpec {
  ImageSize size{640, 480, 8};
  double camera_height = 1.5;  // m above the ground plane
  double focal = 500.0;        // px
  double pitch = 0.0;          // rad, positive looks down
  double yaw = 0.0;            // rad, positive looks right
  double z_near = 4.0;         // m
  double z_far = 80.0;         // m
  std::vector<LaneSpec> lanes;
  std::vector<MarkingRectSpec> markings;
  double ridge_sigma = 4.0;    // px, lane confidence profile
  double noise_sigma = 0.0;
  double clutter_density = 0.0;
  std::uint64_t seed = 0;
};

struct SceneRender {
  FrameAnnotation annotation;
  GridMask grid_mask;
  QuadrantMask quadrant_mask;
  ConfidenceMap lane_map;     // 8 channels
  ConfidenceMap marking_map;  // 9 channels
  ConfidenceMap vpp_map;      // 5 channels
  std::vector<GtMarking> gt_markings;
};

namespace detail {

struct Vec3 {
  double x, y, z;
};

class Pinhole {
 public:
  Pinhole(const SceneSpec& spec)
      : f_(spec.focal), cx_(spec.size.width / 2.0),
        cy_(spec.size.height / 2.0), h_(spec.camera_height),
        ca_(std::cos(spec.pitch)), sa_(std::sin(spec.pitch)),
        cf_(std::cos(spec.yaw)), sf_(std::sin(spec.yaw)) {}

  // camera frame: x right, y down, z forward; yaw then pitch
  Vec3 to_camera(Vec3 p) const {
    const double x = cf_ * p.x - sf_ * p.z;
    const double z = sf_ * p.x + cf_ * p.z;
    return {x, ca_ * p.y - sa_ * z, sa_ * p.y + ca_ * z};
  }

  PixelPoint project_ground(double lateral, double dist) const {
    const Vec3 c = to_camera({lateral, h_, dist});
    if (c.z <= 1e-9) throw ValidationError("scene point behind the camera");
    return {cx_ + f_ * c.x / c.z, cy_ + f_ * c.y / c.z};
  }

  // image point all lanes running along +z converge to
  PixelPoint vanishing_point() const {
    const Vec3 d = to_camera({0, 0, 1});
    if (d.z <= 1e-9) throw ValidationError("camera looks away from the road");
    return {cx_ + f_ * d.x / d.z, cy_ + f_ * d.y / d.z};
  }

 private:
  double f_, cx_, cy_, h_, ca_, sa_, cf_, sf_;
};

inline double lane_lateral(const LaneSpec& lane, double z) {
  return lane.offset + lane.curvature * z * z;
}

inline PixelPoint clamp_to_image(PixelPoint p, const ImageSize& size) {
  return {std::clamp(p.x, 0.0, size.width - 1.0),
          std::clamp(p.y, 0.0, size.height - 1.0)};
}

inline double point_segment_dist(PixelPoint p, PixelPoint a, PixelPoint b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 == 0 ? 0 : ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline void add_noise(ConfidenceMap& map, std::mt19937_64& rng, double sigma,
                      double clutter_density) {
  if (sigma > 0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (float& v : map.data)
      v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
  }
  if (clutter_density > 0) {
    std::bernoulli_distribution hit(clutter_density);
    std::uniform_real_distribution<double> level(0.6, 1.0);
    for (float& v : map.data)
      if (hit(rng)) v = static_cast<float>(level(rng));
  }
}

}  // namespace detail

inline SceneRender render(const SceneSpec& spec) {
  spec.size.validate();
  if (!(spec.z_near > 0 && spec.z_far > spec.z_near))
    throw ValidationError("need 0 < z_near < z_far");
  const detail::Pinhole cam(spec);
  const int samples = 96;

  SceneRender out;
  out.annotation.size = spec.size;

  // lanes: thin closed quads (left edge near->far, right edge far->near)
  std::vector<std::vector<PixelPoint>> centerlines;
  for (const auto& lane : spec.lanes) {
    if (label_by_id(lane.label_id).kind != LabelKind::kLane)
      throw ValidationError("lane spec uses a non-lane label");
    std::vector<PixelPoint> left, right, center;
    for (int i = 0; i <= samples; ++i) {
      const double z =
          spec.z_near + (spec.z_far - spec.z_near) * i / samples;
      const double x = detail::lane_lateral(lane, z);
      left.push_back(detail::clamp_to_image(
          cam.project_ground(x - lane.width / 2, z), spec.size));
      right.push_back(detail::clamp_to_image(
          cam.project_ground(x + lane.width / 2, z), spec.size));
      center.push_back(detail::clamp_to_image(cam.project_ground(x, z),
                                              spec.size));
    }
    AnnotatedObject obj;
    obj.label_id = lane.label_id;
    obj.polygon = left;
    obj.polygon.insert(obj.polygon.end(), right.rbegin(), right.rend());
    out.annotation.objects.push_back(std::move(obj));
    centerlines.push_back(std::move(center));
  }

  // markings: ground rectangles
  for (const auto& rect : spec.markings) {
    if (label_by_id(rect.label_id).kind != LabelKind::kRoadMarking)
      throw ValidationError("marking spec uses a non-marking label");
    AnnotatedObject obj;
    obj.label_id = rect.label_id;
    for (auto [x, z] : {std::pair{rect.x0, rect.z0}, {rect.x1, rect.z0},
                        {rect.x1, rect.z1}, {rect.x0, rect.z1}})
      obj.polygon.push_back(
          detail::clamp_to_image(cam.project_ground(x, z), spec.size));
    out.annotation.objects.push_back(std::move(obj));
  }

  if (!spec.lanes.empty()) {
    const PixelPoint vp = cam.vanishing_point();
    if (!spec.size.contains_pixel(vp.x, vp.y))
      throw ValidationError("vanishing point falls outside the image");
    out.annotation.vp = vp;
    out.annotation.vp_difficulty = VpDifficulty::kEasy;
  }
  out.annotation.validate();

  out.grid_mask = encode_grid(out.annotation, spec.size);
  out.quadrant_mask = encode_quadrant(out.annotation.vp, spec.size);

  const int gh = spec.size.grid_height(), gw = spec.size.grid_width();
  out.lane_map = ConfidenceMap(kNumLaneClasses, gh, gw);
  out.marking_map = ConfidenceMap(kNumClasses - kNumLaneClasses, gh, gw);
  out.vpp_map = one_hot(out.quadrant_mask);

  // Gaussian ridge per lane channel around the projected centerline
  for (std::size_t li = 0; li < spec.lanes.size(); ++li) {
    const auto& line = centerlines[li];
    const int channel = spec.lanes[li].label_id;
    for (int y = 0; y < gh; ++y) {
      for (int x = 0; x < gw; ++x) {
        const PixelPoint c = cell_center({x, y}, spec.size);
        double d = 1e18;
        for (std::size_t i = 0; i + 1 < line.size(); ++i)
          d = std::min(d, detail::point_segment_dist(c, line[i], line[i + 1]));
        const double v =
            std::exp(-d * d / (2 * spec.ridge_sigma * spec.ridge_sigma));
        auto& cell = out.lane_map.at(channel, y, x);
        cell = std::max(cell, static_cast<float>(v));
      }
    }
  }

  // marking channels from the per-rectangle grid masks
  for (const auto& rect : spec.markings) {
    FrameAnnotation single;
    single.size = spec.size;
    single.objects.push_back(
        out.annotation.objects[spec.lanes.size() +
                               (&rect - spec.markings.data())]);
    const GridMask m = encode_grid(single, spec.size);
    GtMarking gt;
    gt.label_id = rect.label_id;
    for (int y = 0; y < gh; ++y)
      for (int x = 0; x < gw; ++x)
        if (m.has_label(y, x, rect.label_id)) {
          gt.cells.insert({x, y});
          out.marking_map.at(rect.label_id - kNumLaneClasses, y, x) = 0.9f;
        }
    out.gt_markings.push_back(std::move(gt));
  }

  std::mt19937_64 rng(spec.seed);
  detail::add_noise(out.lane_map, rng, spec.noise_sigma, spec.clutter_density);
  detail::add_noise(out.marking_map, rng, spec.noise_sigma,
                    spec.clutter_density);
  detail::add_noise(out.vpp_map, rng, spec.noise_sigma, 0.0);
  return out;
}

struct OracleReport {
  double lane_f1 = 0;
  double lane_precision = 0;
  double lane_recall = 0;
  double marking_recall = 1;
  double marking_precision = 1;
  double vp_existence = 0;
  int vp_cell_error = -1;  // Chebyshev distance, -1 when no GT VP
  std::size_t num_curves = 0;
};

struct OracleConfig {
  double lane_match_radius = 20.0;  // px
  double marking_threshold = 0.5;
  LaneExtractConfig lane;
};

// Renders the scene, runs the full decode/post-process pipeline on the
// rendered maps, and scores the result against the rendered ground truth.
inline OracleReport oracle_eval(const SceneSpec& spec,
                                const OracleConfig& config = {}) {
  const SceneRender scene = render(spec);
  OracleReport report;

  const VpDecodeResult vp = decode_vp(scene.vpp_map);
  report.vp_existence = vp.existence;
  std::optional<PixelPoint> vp_pixel;
  if (vp.existence >= 0.5)
    vp_pixel = cell_center(vp.location, spec.size);

  if (scene.annotation.vp) {
    const Cell gt_cell = pixel_to_cell(*scene.annotation.vp, spec.size);
    report.vp_cell_error = std::max(std::abs(vp.location.x - gt_cell.x),
                                    std::abs(vp.location.y - gt_cell.y));
  }

  const auto curves =
      extract_lanes(scene.lane_map, vp_pixel, spec.size, config.lane);
  report.num_curves = curves.size();
  std::vector<LanePoint> pred_points;
  for (const auto& curve : curves)
    pred_points.insert(pred_points.end(), curve.support.begin(),
                       curve.support.end());
  const LaneEvalResult lanes =
      eval_lanes(pred_points, scene.grid_mask, spec.size,
                 config.lane_match_radius, /*class_aware=*/true);
  report.lane_f1 = lanes.overall.f1();
  report.lane_precision = lanes.overall.precision();
  report.lane_recall = lanes.overall.recall();

  const auto instances =
      extract_markings(scene.marking_map, config.marking_threshold, spec.size);
  const MarkingEvalResult markings = eval_markings(instances, scene.gt_markings);
  report.marking_recall = markings.overall.recall();
  report.marking_precision = markings.overall.precision();
  return report;
}

}  // namespace vpg
