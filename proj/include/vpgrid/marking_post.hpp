// Road-marking post-processing: confidence thresholding with optional grid
// regression re-anchoring, then iterative merging into marking instances.
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vpgrid/core.hpp"
#include "vpgrid/losses.hpp"  // GridRegressionMap

namespace vpg {

struct PixelRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool operator==(const PixelRect&) const = default;
};

struct MarkingInstance {
  int label_id = 0;
  std::set<Cell> cells;
  std::optional<PixelRect> box;  // absent for unmergeable classes
  double score = 0;              // mean cell confidence
};

// Per-class thresholded cell sets. `map` carries one channel per road-marking
// class in taxonomy order (stop_line first). When a regression map is given,
// each cell is re-anchored to the cell containing its regressed target point.
inline std::map<int, std::set<Cell>> sample_cells(
    const ConfidenceMap& map, double threshold, const ImageSize& size,
    const GridRegressionMap* regression = nullptr) {
  if (!(threshold > 0 && threshold < 1))
    throw ValidationError("threshold must lie in (0,1)");
  std::map<int, std::set<Cell>> out;
  for (int c = 0; c < map.channels; ++c) {
    const int label_id = kNumLaneClasses + c;
    label_by_id(label_id);
    for (int y = 0; y < map.height; ++y) {
      for (int x = 0; x < map.width; ++x) {
        if (map.at(c, y, x) < threshold) continue;
        Cell cell{x, y};
        if (regression) {
          const auto i = regression->index(y, x);
          const PixelPoint center = cell_center(cell, size);
          const double tx = center.x + regression->dx[i];
          const double ty = center.y + regression->dy[i];
          if (size.contains_pixel(tx, ty))
            cell = pixel_to_cell({tx, ty}, size);
        }
        out[label_id].insert(cell);
      }
    }
  }
  return out;
}

namespace detail {
inline PixelRect cell_set_box(const std::set<Cell>& cells,
                              const ImageSize& size) {
  PixelRect box{1e18, 1e18, -1e18, -1e18};
  for (const Cell& c : cells) {
    box.x0 = std::min(box.x0, static_cast<double>(c.x * size.grid));
    box.y0 = std::min(box.y0, static_cast<double>(c.y * size.grid));
    box.x1 = std::max(box.x1, static_cast<double>((c.x + 1) * size.grid));
    box.y1 = std::max(box.y1, static_cast<double>((c.y + 1) * size.grid));
  }
  return box;
}
}  // namespace detail

inline bool is_unmerged_class(int label_id) {
  return label_by_id(label_id).name == "crosswalk" ||
         label_by_id(label_id).name == "safety_zone";
}

// Groups same-class cells into instances by iterative 8-connected expansion.
// Crosswalk and safety-zone cells are reported as one raw cell set with no
// box. Scores are the mean confidence of member cells when a map is given.
inline std::vector<MarkingInstance> merge_cells(
    const std::set<Cell>& cells, int label_id, const ImageSize& size,
    const ConfidenceMap* map = nullptr, int channel = 0) {
  label_by_id(label_id);
  std::vector<MarkingInstance> out;
  if (cells.empty()) return out;

  auto mean_score = [&](const std::set<Cell>& members) {
    if (!map) return 1.0;
    double sum = 0;
    for (const Cell& c : members) sum += map->at(channel, c.y, c.x);
    return sum / members.size();
  };

  if (is_unmerged_class(label_id)) {
    MarkingInstance inst;
    inst.label_id = label_id;
    inst.cells = cells;
    inst.score = mean_score(cells);
    out.push_back(std::move(inst));
    return out;
  }

  std::set<Cell> remaining = cells;
  while (!remaining.empty()) {
    // grow a component from an arbitrary seed until no neighbor joins
    std::set<Cell> component;
    std::vector<Cell> frontier{*remaining.begin()};
    remaining.erase(remaining.begin());
    while (!frontier.empty()) {
      const Cell c = frontier.back();
      frontier.pop_back();
      component.insert(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Cell n{c.x + dx, c.y + dy};
          auto it = remaining.find(n);
          if (it != remaining.end()) {
            remaining.erase(it);
            frontier.push_back(n);
          }
        }
      }
    }
    MarkingInstance inst;
    inst.label_id = label_id;
    inst.box = detail::cell_set_box(component, size);
    inst.score = mean_score(component);
    inst.cells = std::move(component);
    out.push_back(std::move(inst));
  }
  return out;
}

// Threshold + merge for every road-marking channel of `map`.
inline std::vector<MarkingInstance> extract_markings(
    const ConfidenceMap& map, double threshold, const ImageSize& size,
    const GridRegressionMap* regression = nullptr) {
  std::vector<MarkingInstance> out;
  for (auto& [label_id, cells] :
       sample_cells(map, threshold, size, regression)) {
    const int channel = label_id - kNumLaneClasses;
    auto merged = merge_cells(cells, label_id, size, &map, channel);
    out.insert(out.end(), merged.begin(), merged.end());
  }
  return out;
}

}  // namespace vpg
