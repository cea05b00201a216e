// Core domain types: class taxonomy, lattice geometry, dense maps, frame
// annotations. Coordinate convention: origin top-left, x rightward, y
// downward, row-major storage.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vpg {

// Raised on invalid user input (bad labels, out-of-bounds geometry, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised on malformed files (bad magic, truncated payload, ...).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LabelKind { kLane, kRoadMarking };

struct ClassLabel {
  int id;
  std::string_view name;
  LabelKind kind;

  bool operator==(const ClassLabel&) const = default;
};

inline constexpr int kNumClasses = 17;
inline constexpr int kNumLaneClasses = 8;

// Dense ids 0..16: lanes first, then road markings.
inline constexpr std::array<ClassLabel, kNumClasses> kTaxonomy{{
    {0, "single_white", LabelKind::kLane},
    {1, "dashed_white", LabelKind::kLane},
    {2, "double_white", LabelKind::kLane},
    {3, "single_yellow", LabelKind::kLane},
    {4, "dashed_yellow", LabelKind::kLane},
    {5, "double_yellow", LabelKind::kLane},
    {6, "dashed_blue", LabelKind::kLane},
    {7, "zigzag", LabelKind::kLane},
    {8, "stop_line", LabelKind::kRoadMarking},
    {9, "left_arrow", LabelKind::kRoadMarking},
    {10, "right_arrow", LabelKind::kRoadMarking},
    {11, "straight_arrow", LabelKind::kRoadMarking},
    {12, "uturn_arrow", LabelKind::kRoadMarking},
    {13, "speed_bump", LabelKind::kRoadMarking},
    {14, "crosswalk", LabelKind::kRoadMarking},
    {15, "safety_zone", LabelKind::kRoadMarking},
    {16, "other_markings", LabelKind::kRoadMarking},
}};

inline const ClassLabel& label_by_id(int id) {
  if (id < 0 || id >= kNumClasses)
    throw ValidationError("class id out of range: " + std::to_string(id));
  return kTaxonomy[static_cast<std::size_t>(id)];
}

inline const ClassLabel& label_by_name(std::string_view name) {
  for (const auto& l : kTaxonomy)
    if (l.name == name) return l;
  std::string msg = "unknown class name '" + std::string(name) + "'; valid names:";
  for (const auto& l : kTaxonomy) msg += " " + std::string(l.name);
  throw ValidationError(msg);
}

enum class VpDifficulty { kEasy, kHard, kNone };

inline std::string_view to_string(VpDifficulty d) {
  switch (d) {
    case VpDifficulty::kEasy: return "EASY";
    case VpDifficulty::kHard: return "HARD";
    case VpDifficulty::kNone: return "NONE";
  }
  throw ValidationError("bad difficulty value");
}

inline VpDifficulty difficulty_from_string(std::string_view s) {
  if (s == "EASY") return VpDifficulty::kEasy;
  if (s == "HARD") return VpDifficulty::kHard;
  if (s == "NONE") return VpDifficulty::kNone;
  throw ValidationError("unknown VP difficulty '" + std::string(s) + "'");
}

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const PixelPoint&) const = default;
};

// Lattice cell coordinate: x = column, y = row.
struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

struct ImageSize {
  int width = 640;
  int height = 480;
  int grid = 8;  // cell side in pixels

  int grid_width() const { return width / grid; }
  int grid_height() const { return height / grid; }

  void validate() const {
    if (width <= 0 || height <= 0 || grid <= 0)
      throw ValidationError("image size fields must be positive");
    if (width % grid != 0 || height % grid != 0)
      throw ValidationError("width and height must be divisible by grid");
  }

  bool contains_pixel(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x < width && y < height;
  }

  bool operator==(const ImageSize&) const = default;
};

inline PixelPoint cell_center(Cell cell, const ImageSize& size) {
  if (cell.x < 0 || cell.y < 0 || cell.x >= size.grid_width() ||
      cell.y >= size.grid_height())
    throw ValidationError("cell out of lattice bounds");
  return {static_cast<double>(cell.x * size.grid + size.grid / 2),
          static_cast<double>(cell.y * size.grid + size.grid / 2)};
}

inline Cell pixel_to_cell(PixelPoint p, const ImageSize& size) {
  if (!size.contains_pixel(p.x, p.y))
    throw ValidationError("pixel outside image bounds");
  return {static_cast<int>(p.x) / size.grid, static_cast<int>(p.y) / size.grid};
}

// Dense C x H x W map, channel-major, row-major within channel.
struct ConfidenceMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  ConfidenceMap() = default;
  ConfidenceMap(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  void validate_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) throw ValidationError("non-finite value in map");
  }

  void validate_probabilities() const {
    for (float v : data)
      if (!(v >= 0.0f && v <= 1.0f))
        throw ValidationError("probability map value outside [0,1]");
  }
};

// H x W lattice of per-cell label sets (17-bit bitsets).
struct GridMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> cells;

  GridMask() = default;
  GridMask(int h, int w)
      : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0u) {}

  static GridMask for_size(const ImageSize& size) {
    return GridMask(size.grid_height(), size.grid_width());
  }

  std::uint32_t& at(int y, int x) {
    return cells[static_cast<std::size_t>(y) * width + x];
  }
  std::uint32_t at(int y, int x) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }

  void set_label(int y, int x, int label_id) {
    at(y, x) |= (1u << label_id);
  }
  bool has_label(int y, int x, int label_id) const {
    return (at(y, x) >> label_id) & 1u;
  }

  bool operator==(const GridMask&) const = default;
};

struct AnnotatedObject {
  std::vector<PixelPoint> polygon;
  int label_id = 0;

  bool operator==(const AnnotatedObject&) const = default;
};

struct FrameAnnotation {
  ImageSize size;
  std::vector<AnnotatedObject> objects;
  std::optional<PixelPoint> vp;
  VpDifficulty vp_difficulty = VpDifficulty::kNone;

  void validate() const {
    size.validate();
    for (const auto& obj : objects) {
      label_by_id(obj.label_id);
      for (const auto& v : obj.polygon)
        if (!size.contains_pixel(v.x, v.y))
          throw ValidationError("polygon vertex outside image bounds");
    }
    if (vp.has_value() != (vp_difficulty != VpDifficulty::kNone))
      throw ValidationError("vp must be present iff difficulty != NONE");
    if (vp && !size.contains_pixel(vp->x, vp->y))
      throw ValidationError("vp outside image bounds");
  }

  bool operator==(const FrameAnnotation&) const = default;
};

}  // namespace vpg
