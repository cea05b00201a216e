// Evaluation metrics: cell/point lane matching with F1, blob-level road
// marking recall/precision, and the VP recall-vs-distance curve.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vpgrid/core.hpp"
#include "vpgrid/lane_post.hpp"
#include "vpgrid/marking_post.hpp"

namespace vpg {

struct LaneClassCounts {
  int tp_points = 0;
  int fp_points = 0;
  int detected_cells = 0;
  int gt_cells = 0;

  double precision() const {
    const int n = tp_points + fp_points;
    return n == 0 ? 0.0 : static_cast<double>(tp_points) / n;
  }
  double recall() const {
    return gt_cells == 0 ? 1.0 : static_cast<double>(detected_cells) / gt_cells;
  }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

struct LaneEvalResult {
  std::map<int, LaneClassCounts> per_class;
  LaneClassCounts overall;
};

// For every GT lane cell, the nearest predicted point within R marks the
// cell detected and that point a true positive (counted once); unmatched
// points are false positives. F1 pairs point precision with cell recall.
inline LaneEvalResult eval_lanes(const std::vector<LanePoint>& pred_points,
                                 const GridMask& gt, const ImageSize& size,
                                 double match_radius, bool class_aware) {
  if (!(match_radius > 0)) throw ValidationError("R must be positive");
  LaneEvalResult result;
  std::vector<bool> matched(pred_points.size(), false);

  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      for (int lane = 0; lane < kNumLaneClasses; ++lane) {
        if (!gt.has_label(y, x, lane)) continue;
        auto& cls = result.per_class[lane];
        ++cls.gt_cells;
        ++result.overall.gt_cells;

        // the cell is detected when its nearest point lies within R; every
        // in-radius point of a detected cell becomes a true positive
        const PixelPoint center = cell_center({x, y}, size);
        bool detected = false;
        for (std::size_t i = 0; i < pred_points.size(); ++i) {
          if (class_aware && pred_points[i].label_id != lane) continue;
          const double d = std::hypot(pred_points[i].pos.x - center.x,
                                      pred_points[i].pos.y - center.y);
          if (d <= match_radius) {
            detected = true;
            matched[i] = true;
          }
        }
        if (detected) {
          ++cls.detected_cells;
          ++result.overall.detected_cells;
        }
      }
    }
  }

  for (std::size_t i = 0; i < pred_points.size(); ++i) {
    auto& cls = result.per_class[pred_points[i].label_id];
    if (matched[i]) {
      ++cls.tp_points;
      ++result.overall.tp_points;
    } else {
      ++cls.fp_points;
      ++result.overall.fp_points;
    }
  }
  return result;
}

struct MarkingClassCounts {
  int detected_gt = 0;
  int gt_instances = 0;
  int true_blobs = 0;
  int pred_blobs = 0;

  double recall() const {
    return gt_instances == 0 ? 1.0
                             : static_cast<double>(detected_gt) / gt_instances;
  }
  double precision() const {
    return pred_blobs == 0 ? 1.0
                           : static_cast<double>(true_blobs) / pred_blobs;
  }
};

struct MarkingEvalResult {
  std::map<int, MarkingClassCounts> per_class;
  MarkingClassCounts overall;
};

struct GtMarking {
  int label_id = 0;
  std::set<Cell> cells;
};

// A predicted blob is true iff strictly more than half of its cells overlap
// same-class GT cells; a GT instance overlaid by any true blob is detected.
inline MarkingEvalResult eval_markings(const std::vector<MarkingInstance>& pred,
                                       const std::vector<GtMarking>& gt) {
  MarkingEvalResult result;
  for (const auto& g : gt) {
    ++result.per_class[g.label_id].gt_instances;
    ++result.overall.gt_instances;
  }
  std::vector<bool> gt_detected(gt.size(), false);

  for (const auto& blob : pred) {
    auto& cls = result.per_class[blob.label_id];
    ++cls.pred_blobs;
    ++result.overall.pred_blobs;
    if (blob.cells.empty()) continue;

    std::size_t tp_cells = 0;
    std::vector<std::size_t> overlaid;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      if (gt[gi].label_id != blob.label_id) continue;
      bool touches = false;
      for (const Cell& c : blob.cells) {
        if (gt[gi].cells.count(c)) {
          touches = true;
          ++tp_cells;
        }
      }
      if (touches) overlaid.push_back(gi);
    }
    if (2 * tp_cells > blob.cells.size()) {  // strictly greater than half
      ++cls.true_blobs;
      ++result.overall.true_blobs;
      for (std::size_t gi : overlaid) gt_detected[gi] = true;
    }
  }

  for (std::size_t gi = 0; gi < gt.size(); ++gi) {
    if (!gt_detected[gi]) continue;
    ++result.per_class[gt[gi].label_id].detected_gt;
    ++result.overall.detected_gt;
  }
  return result;
}

struct VpGt {
  std::optional<PixelPoint> point;
  VpDifficulty difficulty = VpDifficulty::kNone;
};

struct VpRecallCurve {
  std::vector<double> thresholds;
  std::vector<double> recalls;
};

// Recall(R) over frames whose difficulty is not NONE (HARD frames can be
// excluded with include_hard = false): prediction present and Euclidean
// distance <= R.
inline VpRecallCurve eval_vp(const std::vector<std::optional<PixelPoint>>& pred,
                             const std::vector<VpGt>& gt,
                             const std::vector<double>& thresholds,
                             bool include_hard = true) {
  if (pred.size() != gt.size())
    throw ValidationError("prediction/GT frame count mismatch");
  VpRecallCurve curve;
  curve.thresholds = thresholds;
  for (double r : thresholds) {
    int eligible = 0, hit = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i].difficulty == VpDifficulty::kNone) continue;
      if (!include_hard && gt[i].difficulty == VpDifficulty::kHard) continue;
      ++eligible;
      if (!pred[i] || !gt[i].point) continue;
      const double d = std::hypot(pred[i]->x - gt[i].point->x,
                                  pred[i]->y - gt[i].point->y);
      if (d <= r) ++hit;
    }
    curve.recalls.push_back(eligible == 0
                                ? 1.0
                                : static_cast<double>(hit) / eligible);
  }
  return curve;
}

}  // namespace vpg
