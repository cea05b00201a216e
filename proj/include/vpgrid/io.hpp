// File formats: the "VPGC" binary tensor container, JSON serialization of
// annotations, masks, curves and instances, and the pipeline configuration.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpgrid/core.hpp"
#include "vpgrid/lane_post.hpp"
#include "vpgrid/marking_post.hpp"
#include "vpgrid/metrics.hpp"
#include "vpgrid/netspec.hpp"
#include "vpgrid/synth.hpp"

namespace vpg {

using nlohmann::json;

// ---------------------------------------------------------------------------
// TensorFile: magic "VPGC", version u8=1, then channels/height/width as u32
// little-endian, then f32 little-endian payload, channel-major.
//
// Normative channel order for full post-processing tensors:
//   [0..4]   VPP (absence, Q1..Q4)
//   [5..21]  class confidences in taxonomy order (8 lanes, 9 markings)
//   [22..23] optional grid-regression offsets (dx, dy), pixels
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kTensorMagic{'V', 'P', 'G', 'C'};
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr int kPostprocessChannels = 5 + kNumClasses;  // 22

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "tensor i/o assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw FormatError("truncated tensor file");
  return value;
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const ConfidenceMap& map) {
  os.write(kTensorMagic.data(), kTensorMagic.size());
  detail::write_raw(os, kTensorVersion);
  detail::write_raw(os, static_cast<std::uint32_t>(map.channels));
  detail::write_raw(os, static_cast<std::uint32_t>(map.height));
  detail::write_raw(os, static_cast<std::uint32_t>(map.width));
  os.write(reinterpret_cast<const char*>(map.data.data()),
           static_cast<std::streamsize>(map.data.size() * sizeof(float)));
}

inline void write_tensor(const std::string& path, const ConfidenceMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_tensor(os, map);
}

inline ConfidenceMap read_tensor(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kTensorMagic) throw FormatError("bad tensor magic");
  if (detail::read_raw<std::uint8_t>(is) != kTensorVersion)
    throw FormatError("unsupported tensor version");
  const auto c = detail::read_raw<std::uint32_t>(is);
  const auto h = detail::read_raw<std::uint32_t>(is);
  const auto w = detail::read_raw<std::uint32_t>(is);
  if (c == 0 || h == 0 || w == 0 || std::uint64_t(c) * h * w > (1u << 28))
    throw FormatError("implausible tensor shape");
  ConfidenceMap map(static_cast<int>(c), static_cast<int>(h),
                    static_cast<int>(w));
  is.read(reinterpret_cast<char*>(map.data.data()),
          static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  if (!is) throw FormatError("truncated tensor payload");
  char extra;
  if (is.read(&extra, 1)) throw FormatError("trailing bytes after payload");
  return map;
}

inline ConfidenceMap read_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_tensor(is);
}

// ---------------------------------------------------------------------------
// FrameAnnotation JSON:
// {"image":{"w":..,"h":..},"objects":[{"label":..,"polygon":[[x,y],..]}],
//  "vp":{"x":..,"y":..,"difficulty":"EASY"}}  -- "vp" omitted when NONE
// ---------------------------------------------------------------------------

inline json to_json(const FrameAnnotation& ann) {
  json j;
  j["image"] = {{"w", ann.size.width}, {"h", ann.size.height}};
  j["objects"] = json::array();
  for (const auto& obj : ann.objects) {
    json poly = json::array();
    for (const auto& v : obj.polygon) poly.push_back({v.x, v.y});
    j["objects"].push_back({{"label", label_by_id(obj.label_id).name},
                            {"polygon", std::move(poly)}});
  }
  if (ann.vp)
    j["vp"] = {{"x", ann.vp->x},
               {"y", ann.vp->y},
               {"difficulty", to_string(ann.vp_difficulty)}};
  return j;
}

inline FrameAnnotation annotation_from_json(const json& j, int grid = 8) {
  FrameAnnotation ann;
  try {
    ann.size.width = j.at("image").at("w").get<int>();
    ann.size.height = j.at("image").at("h").get<int>();
    ann.size.grid = grid;
    for (const auto& obj : j.at("objects")) {
      AnnotatedObject o;
      o.label_id = label_by_name(obj.at("label").get<std::string>()).id;
      for (const auto& v : obj.at("polygon"))
        o.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      ann.objects.push_back(std::move(o));
    }
    if (j.contains("vp")) {
      ann.vp = PixelPoint{j["vp"].at("x").get<double>(),
                          j["vp"].at("y").get<double>()};
      ann.vp_difficulty =
          difficulty_from_string(j["vp"].at("difficulty").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed annotation json: ") + e.what());
  }
  ann.validate();
  return ann;
}

// ---------------------------------------------------------------------------
// GridMask JSON: dims + run-length-encoded per-cell hex bitmasks, row-major:
// {"w":80,"h":60,"rle":[[count,"hex"],...]}
// ---------------------------------------------------------------------------

inline json to_json(const GridMask& mask) {
  json rle = json::array();
  std::size_t i = 0;
  while (i < mask.cells.size()) {
    std::size_t run = 1;
    while (i + run < mask.cells.size() && mask.cells[i + run] == mask.cells[i])
      ++run;
    std::ostringstream hex;
    hex << std::hex << mask.cells[i];
    rle.push_back({run, hex.str()});
    i += run;
  }
  return {{"w", mask.width}, {"h", mask.height}, {"rle", std::move(rle)}};
}

inline GridMask grid_mask_from_json(const json& j) {
  GridMask mask;
  try {
    mask = GridMask(j.at("h").get<int>(), j.at("w").get<int>());
    std::size_t i = 0;
    for (const auto& pair : j.at("rle")) {
      const auto run = pair.at(0).get<std::size_t>();
      const auto value = static_cast<std::uint32_t>(
          std::stoul(pair.at(1).get<std::string>(), nullptr, 16));
      if (i + run > mask.cells.size())
        throw FormatError("grid mask rle overruns dims");
      if (value >> kNumClasses)
        throw FormatError("grid mask cell has bits beyond the taxonomy");
      for (std::size_t k = 0; k < run; ++k) mask.cells[i++] = value;
    }
    if (i != mask.cells.size()) throw FormatError("grid mask rle underruns dims");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed grid mask json: ") + e.what());
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Detection outputs
// ---------------------------------------------------------------------------

inline json to_json(const LaneCurve& curve) {
  return {{"label", label_by_id(curve.label_id).name},
          {"coeffs", {curve.a, curve.b, curve.c}},
          {"y_range", {curve.y_near, curve.y_far}},
          {"support", curve.support.size()}};
}

inline json to_json(const MarkingInstance& inst) {
  json cells = json::array();
  for (const Cell& c : inst.cells) cells.push_back({c.y, c.x});
  json box;
  if (inst.box)
    box = {inst.box->x0, inst.box->y0, inst.box->x1, inst.box->y1};
  return {{"label", label_by_id(inst.label_id).name},
          {"box", std::move(box)},
          {"cells", std::move(cells)},
          {"score", inst.score}};
}

// ---------------------------------------------------------------------------
// Layer specs (netspec input)
// ---------------------------------------------------------------------------

inline NetworkSpec network_spec_from_json(const json& j) {
  NetworkSpec spec;
  try {
    for (const auto& layer : j.at("layers")) {
      LayerSpec l;
      l.kernel = layer.at("kernel").get<int>();
      l.stride = layer.at("stride").get<int>();
      l.pad = layer.at("pad").get<int>();
      if (layer.contains("pool"))
        l.pool = PoolSpec{layer["pool"].at("size").get<int>(),
                          layer["pool"].at("stride").get<int>()};
      spec.layers.push_back(l);
    }
    if (j.contains("receptive_fields"))
      spec.declared_receptive_fields =
          j["receptive_fields"].get<std::vector<int>>();
    if (j.contains("output_factor"))
      spec.declared_output_factor = j["output_factor"].get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed network spec json: ") + e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// SceneSpec JSON
// ---------------------------------------------------------------------------

inline SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec spec;
  try {
    if (j.contains("image")) {
      spec.size.width = j["image"].at("w").get<int>();
      spec.size.height = j["image"].at("h").get<int>();
      if (j["image"].contains("grid"))
        spec.size.grid = j["image"]["grid"].get<int>();
    }
    auto opt = [&](const char* key, double& field) {
      if (j.contains(key)) field = j[key].get<double>();
    };
    opt("camera_height", spec.camera_height);
    opt("focal", spec.focal);
    opt("pitch", spec.pitch);
    opt("yaw", spec.yaw);
    opt("z_near", spec.z_near);
    opt("z_far", spec.z_far);
    opt("ridge_sigma", spec.ridge_sigma);
    opt("noise_sigma", spec.noise_sigma);
    opt("clutter_density", spec.clutter_density);
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    for (const auto& lane : j.value("lanes", json::array())) {
      LaneSpec l;
      l.offset = lane.at("offset").get<double>();
      l.curvature = lane.value("curvature", 0.0);
      l.width = lane.value("width", l.width);
      l.label_id = label_by_name(lane.value("label", "dashed_white")).id;
      spec.lanes.push_back(l);
    }
    for (const auto& rect : j.value("markings", json::array())) {
      MarkingRectSpec m;
      m.x0 = rect.at("x0").get<double>();
      m.z0 = rect.at("z0").get<double>();
      m.x1 = rect.at("x1").get<double>();
      m.z1 = rect.at("z1").get<double>();
      m.label_id = label_by_name(rect.value("label", "straight_arrow")).id;
      spec.markings.push_back(m);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scene spec json: ") + e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// PipelineConfig: every tunable named in the module design decisions, with
// its stated default. Unknown keys are rejected.
// ---------------------------------------------------------------------------

struct PipelineConfig {
  ImageSize size{640, 480, 8};
  LaneExtractConfig lane;
  double marking_threshold = 0.5;
  double vp_existence_threshold = 0.5;
  double binary_vp_radius = 16.0;
  double loss_ratio_limit = 10.0;
  double lane_match_radius = 20.0;
  std::vector<double> vp_eval_thresholds = {4, 8, 12, 16, 20, 30, 40,
                                            50, 60, 80, 100};

  void validate() const {
    size.validate();
    if (!(lane.peak_threshold > 0 && lane.peak_threshold < 1) ||
        !(marking_threshold > 0 && marking_threshold < 1) ||
        !(vp_existence_threshold >= 0 && vp_existence_threshold <= 1) ||
        lane.cluster_dist <= 0 || lane.vp_attach_radius <= 0 ||
        lane.ipm_margin <= 0 || binary_vp_radius <= 0 ||
        loss_ratio_limit <= 1 || lane_match_radius <= 0)
      throw ValidationError("config field out of range");
    for (double r : vp_eval_thresholds)
      if (r <= 0) throw ValidationError("vp eval thresholds must be positive");
  }
};

inline PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  static const std::vector<std::string> known = {
      "image",         "peak_threshold",   "cluster_dist",
      "vp_attach_radius", "ipm_margin",    "min_cluster_size",
      "merge_overlap", "marking_threshold", "vp_existence_threshold",
      "binary_vp_radius", "loss_ratio_limit", "lane_match_radius",
      "vp_eval_thresholds"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw FormatError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("image")) {
      cfg.size.width = j["image"].at("w").get<int>();
      cfg.size.height = j["image"].at("h").get<int>();
      if (j["image"].contains("grid"))
        cfg.size.grid = j["image"]["grid"].get<int>();
    }
    auto opt = [&](const char* key, double& field) {
      if (j.contains(key)) field = j[key].get<double>();
    };
    opt("peak_threshold", cfg.lane.peak_threshold);
    opt("cluster_dist", cfg.lane.cluster_dist);
    opt("vp_attach_radius", cfg.lane.vp_attach_radius);
    opt("ipm_margin", cfg.lane.ipm_margin);
    opt("merge_overlap", cfg.lane.merge_overlap);
    if (j.contains("min_cluster_size"))
      cfg.lane.min_cluster_size = j["min_cluster_size"].get<std::size_t>();
    opt("marking_threshold", cfg.marking_threshold);
    opt("vp_existence_threshold", cfg.vp_existence_threshold);
    opt("binary_vp_radius", cfg.binary_vp_radius);
    opt("loss_ratio_limit", cfg.loss_ratio_limit);
    opt("lane_match_radius", cfg.lane_match_radius);
    if (j.contains("vp_eval_thresholds"))
      cfg.vp_eval_thresholds = j["vp_eval_thresholds"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed config json: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline json to_json(const PipelineConfig& cfg) {
  return {{"image",
           {{"w", cfg.size.width}, {"h", cfg.size.height}, {"grid", cfg.size.grid}}},
          {"peak_threshold", cfg.lane.peak_threshold},
          {"cluster_dist", cfg.lane.cluster_dist},
          {"vp_attach_radius", cfg.lane.vp_attach_radius},
          {"ipm_margin", cfg.lane.ipm_margin},
          {"min_cluster_size", cfg.lane.min_cluster_size},
          {"merge_overlap", cfg.lane.merge_overlap},
          {"marking_threshold", cfg.marking_threshold},
          {"vp_existence_threshold", cfg.vp_existence_threshold},
          {"binary_vp_radius", cfg.binary_vp_radius},
          {"loss_ratio_limit", cfg.loss_ratio_limit},
          {"lane_match_radius", cfg.lane_match_radius},
          {"vp_eval_thresholds", cfg.vp_eval_thresholds}};
}

}  // namespace vpg
