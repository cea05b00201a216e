// vpgrid command-line tool: encode, decode-vp, postprocess, evaluate,
// synth, netspec. Exit codes: 0 ok, 1 validation, 2 format, 3 internal.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vpgrid/vpgrid.hpp"

namespace fs = std::filesystem;
using vpg::json;

namespace {

vpg::PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream is(path);
  if (!is) throw vpg::FormatError("cannot open config '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw vpg::FormatError(std::string("config parse error: ") + e.what());
  }
  return vpg::config_from_json(j);
}

json load_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw vpg::FormatError("cannot open '" + path.string() + "'");
  try {
    json j;
    is >> j;
    return j;
  } catch (const json::exception& e) {
    throw vpg::FormatError("parse error in '" + path.string() + "': " +
                           e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw vpg::FormatError("cannot write '" + path.string() + "'");
  os << j.dump(2) << "\n";
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw vpg::ValidationError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

// Runs fn(i) for i in [0,n) over `jobs` threads; exceptions are collected
// and the first one rethrown. Output ordering is the caller's concern.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr error;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

int cmd_encode(const std::string& dataset_dir, const std::string& out_dir,
               const vpg::PipelineConfig& cfg, int jobs) {
  const auto files = sorted_json_files(dataset_dir);
  const fs::path out = out_dir.empty() ? fs::path(dataset_dir) : fs::path(out_dir);
  fs::create_directories(out);

  struct FrameResult {
    std::map<int, int> instance_counts;
    std::map<vpg::VpDifficulty, int> vp_counts;
    std::string error;
  };
  std::vector<FrameResult> results(files.size());

  parallel_for(files.size(), jobs, [&](std::size_t i) {
    auto& r = results[i];
    try {
      const vpg::FrameAnnotation ann =
          vpg::annotation_from_json(load_json_file(files[i]), cfg.size.grid);
      const vpg::GridMask mask = vpg::encode_grid(ann, ann.size);
      const vpg::QuadrantMask quad = vpg::encode_quadrant(ann.vp, ann.size);
      const fs::path stem = out / files[i].stem();
      write_json_file(stem.string() + ".grid.json", vpg::to_json(mask));
      vpg::write_tensor(stem.string() + ".quad.vpgt", vpg::one_hot(quad));
      for (const auto& obj : ann.objects) ++r.instance_counts[obj.label_id];
      ++r.vp_counts[ann.vp_difficulty];
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  std::map<int, int> counts;
  std::map<vpg::VpDifficulty, int> vp_counts;
  bool failed = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!results[i].error.empty()) {
      std::cerr << files[i].filename().string() << ": " << results[i].error
                << "\n";
      failed = true;
      continue;
    }
    for (const auto& [id, n] : results[i].instance_counts) counts[id] += n;
    for (const auto& [d, n] : results[i].vp_counts) vp_counts[d] += n;
  }

  std::cout << "Number of instances for each class\n";
  std::cout << std::left << std::setw(18) << "Lane" << std::setw(8) << ""
            << std::setw(18) << "Road marking" << "\n";
  for (int i = 0; i < vpg::kNumLaneClasses; ++i) {
    std::cout << std::left << std::setw(18) << vpg::kTaxonomy[i].name
              << std::setw(8) << counts[i] << std::setw(18)
              << vpg::kTaxonomy[i + vpg::kNumLaneClasses].name
              << counts[i + vpg::kNumLaneClasses] << "\n";
  }
  std::cout << std::left << std::setw(26) << "" << std::setw(18)
            << vpg::kTaxonomy[16].name << counts[16] << "\n";
  std::cout << "Vanishing point  EASY " << vp_counts[vpg::VpDifficulty::kEasy]
            << "  HARD " << vp_counts[vpg::VpDifficulty::kHard] << "  NONE "
            << vp_counts[vpg::VpDifficulty::kNone] << "\n";
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------------------

vpg::ConfidenceMap slice_channels(const vpg::ConfidenceMap& map, int from,
                                  int count) {
  vpg::ConfidenceMap out(count, map.height, map.width);
  std::copy_n(map.data.begin() +
                  static_cast<std::ptrdiff_t>(from) * map.height * map.width,
              static_cast<std::size_t>(count) * map.height * map.width,
              out.data.begin());
  return out;
}

json vp_to_json(const vpg::VpDecodeResult& vp, const vpg::ImageSize& size,
                double existence_threshold) {
  if (vp.existence < existence_threshold) return nullptr;
  const vpg::PixelPoint p = vpg::cell_center(vp.location, size);
  return {{"x", p.x}, {"y", p.y}, {"existence", vp.existence}};
}

int cmd_decode_vp(const std::string& tensor_path,
                  const vpg::PipelineConfig& cfg) {
  vpg::ConfidenceMap map = vpg::read_tensor(tensor_path);
  if (map.channels >= vpg::kPostprocessChannels)
    map = slice_channels(map, 0, vpg::kVppChannels);
  const vpg::VpDecodeResult vp = vpg::decode_vp(map);
  json j{{"location", {{"x", vp.location.x}, {"y", vp.location.y}}},
         {"existence", vp.existence},
         {"p_avg", vp.p_avg},
         {"vp", vp_to_json(vp, cfg.size, cfg.vp_existence_threshold)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

void write_overlay_ppm(const fs::path& path, const vpg::ImageSize& size,
                       const std::vector<vpg::LaneCurve>& lanes,
                       const std::vector<vpg::MarkingInstance>& markings,
                       const std::optional<vpg::PixelPoint>& vp) {
  std::vector<std::array<unsigned char, 3>> img(
      static_cast<std::size_t>(size.width) * size.height, {0, 0, 0});
  auto put = [&](int x, int y, unsigned char r, unsigned char g,
                 unsigned char b) {
    if (x < 0 || y < 0 || x >= size.width || y >= size.height) return;
    img[static_cast<std::size_t>(y) * size.width + x] = {r, g, b};
  };
  for (const auto& curve : lanes)
    for (double y = curve.y_far; y <= curve.y_near; y += 0.5)
      put(static_cast<int>(curve.x_at(y)), static_cast<int>(y), 0, 255, 0);
  for (const auto& inst : markings) {
    for (const vpg::Cell& c : inst.cells)
      for (int dy = 0; dy < size.grid; ++dy)
        for (int dx = 0; dx < size.grid; ++dx)
          put(c.x * size.grid + dx, c.y * size.grid + dy, 0, 0, 200);
  }
  if (vp)
    for (int d = -4; d <= 4; ++d) {
      put(static_cast<int>(vp->x) + d, static_cast<int>(vp->y), 255, 255, 0);
      put(static_cast<int>(vp->x), static_cast<int>(vp->y) + d, 255, 255, 0);
    }
  std::ofstream os(path, std::ios::binary);
  os << "P6\n" << size.width << " " << size.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data()),
           static_cast<std::streamsize>(img.size() * 3));
}

json postprocess_tensor(const vpg::ConfidenceMap& tensor,
                        const vpg::PipelineConfig& cfg, double* elapsed_ms) {
  if (tensor.channels != vpg::kPostprocessChannels &&
      tensor.channels != vpg::kPostprocessChannels + 2)
    throw vpg::FormatError("postprocess tensor must have 22 or 24 channels");
  if (tensor.height != cfg.size.grid_height() ||
      tensor.width != cfg.size.grid_width())
    throw vpg::FormatError("tensor lattice does not match configured size");

  const auto vpp = slice_channels(tensor, 0, vpg::kVppChannels);
  const auto lane_map =
      slice_channels(tensor, vpg::kVppChannels, vpg::kNumLaneClasses);
  const auto marking_map =
      slice_channels(tensor, vpg::kVppChannels + vpg::kNumLaneClasses,
                     vpg::kNumClasses - vpg::kNumLaneClasses);
  std::optional<vpg::GridRegressionMap> regression;
  if (tensor.channels == vpg::kPostprocessChannels + 2) {
    regression.emplace(tensor.height, tensor.width);
    for (int y = 0; y < tensor.height; ++y)
      for (int x = 0; x < tensor.width; ++x) {
        const auto i = regression->index(y, x);
        regression->dx[i] = tensor.at(vpg::kPostprocessChannels, y, x);
        regression->dy[i] = tensor.at(vpg::kPostprocessChannels + 1, y, x);
      }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const vpg::VpDecodeResult vp = vpg::decode_vp(vpp);
  std::optional<vpg::PixelPoint> vp_pixel;
  if (vp.existence >= cfg.vp_existence_threshold)
    vp_pixel = vpg::cell_center(vp.location, cfg.size);
  const auto lanes =
      vpg::extract_lanes(lane_map, vp_pixel, cfg.size, cfg.lane);
  const auto markings =
      vpg::extract_markings(marking_map, cfg.marking_threshold, cfg.size,
                            regression ? &*regression : nullptr);
  const auto t1 = std::chrono::steady_clock::now();
  if (elapsed_ms)
    *elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  json j;
  j["vp"] = vp_to_json(vp, cfg.size, cfg.vp_existence_threshold);
  j["lanes"] = json::array();
  for (const auto& curve : lanes) j["lanes"].push_back(vpg::to_json(curve));
  j["markings"] = json::array();
  for (const auto& inst : markings) j["markings"].push_back(vpg::to_json(inst));
  return j;
}

int cmd_postprocess(const std::string& tensor_path,
                    const vpg::PipelineConfig& cfg, const std::string& out_path,
                    const std::string& overlay_path) {
  const vpg::ConfidenceMap tensor = vpg::read_tensor(tensor_path);
  double ms = 0;
  const json j = postprocess_tensor(tensor, cfg, &ms);
  std::cerr << "post-processing: " << std::fixed << std::setprecision(2) << ms
            << " ms\n";
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json_file(out_path, j);

  if (!overlay_path.empty()) {
    // rebuild typed results for drawing
    const auto vpp = slice_channels(tensor, 0, vpg::kVppChannels);
    const vpg::VpDecodeResult vp = vpg::decode_vp(vpp);
    std::optional<vpg::PixelPoint> vp_pixel;
    if (vp.existence >= cfg.vp_existence_threshold)
      vp_pixel = vpg::cell_center(vp.location, cfg.size);
    const auto lanes = vpg::extract_lanes(
        slice_channels(tensor, vpg::kVppChannels, vpg::kNumLaneClasses),
        vp_pixel, cfg.size, cfg.lane);
    const auto markings = vpg::extract_markings(
        slice_channels(tensor, vpg::kVppChannels + vpg::kNumLaneClasses,
                       vpg::kNumClasses - vpg::kNumLaneClasses),
        cfg.marking_threshold, cfg.size);
    write_overlay_ppm(overlay_path, cfg.size, lanes, markings, vp_pixel);
  }
  return 0;
}

// ---------------------------------------------------------------------------

// Predicted lane points for evaluation: each curve sampled at the lattice
// row centers of its y-extent.
std::vector<vpg::LanePoint> sample_curve_points(const json& lanes,
                                                const vpg::ImageSize& size) {
  std::vector<vpg::LanePoint> points;
  for (const auto& lane : lanes) {
    const int label = vpg::label_by_name(lane.at("label").get<std::string>()).id;
    const double a = lane.at("coeffs").at(0).get<double>();
    const double b = lane.at("coeffs").at(1).get<double>();
    const double c = lane.at("coeffs").at(2).get<double>();
    const double y_near = lane.at("y_range").at(0).get<double>();
    const double y_far = lane.at("y_range").at(1).get<double>();
    for (int row = 0; row < size.grid_height(); ++row) {
      const double y = row * size.grid + size.grid / 2;
      if (y < y_far || y > y_near) continue;
      const double x = (a * y + b) * y + c;
      if (x < 0 || x >= size.width) continue;
      points.push_back({{x, y}, 1.0, label});
    }
  }
  return points;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& gt_dir,
                 const vpg::PipelineConfig& cfg, const std::string& out_prefix,
                 bool include_hard, int jobs) {
  const auto gt_files = sorted_json_files(gt_dir);
  std::vector<fs::path> pred_files;
  for (const auto& gt : gt_files) {
    const fs::path p = fs::path(pred_dir) / gt.filename();
    if (!fs::exists(p))
      throw vpg::ValidationError("missing prediction for frame " +
                                 gt.filename().string());
    pred_files.push_back(p);
  }
  if (gt_files.empty()) throw vpg::ValidationError("no ground truth frames");

  struct FrameEval {
    vpg::LaneEvalResult lanes;
    vpg::MarkingEvalResult markings;
    std::optional<vpg::PixelPoint> pred_vp;
    vpg::VpGt gt_vp;
  };
  std::vector<FrameEval> frames(gt_files.size());

  parallel_for(gt_files.size(), jobs, [&](std::size_t i) {
    const vpg::FrameAnnotation ann =
        vpg::annotation_from_json(load_json_file(gt_files[i]), cfg.size.grid);
    const json pred = load_json_file(pred_files[i]);

    const vpg::GridMask gt_mask = vpg::encode_grid(ann, ann.size);
    auto& frame = frames[i];
    frame.lanes = vpg::eval_lanes(sample_curve_points(pred.at("lanes"), ann.size),
                                  gt_mask, ann.size, cfg.lane_match_radius,
                                  /*class_aware=*/true);

    std::vector<vpg::GtMarking> gt_markings;
    for (const auto& obj : ann.objects) {
      if (vpg::label_by_id(obj.label_id).kind != vpg::LabelKind::kRoadMarking)
        continue;
      vpg::FrameAnnotation single;
      single.size = ann.size;
      single.objects.push_back(obj);
      const vpg::GridMask m = vpg::encode_grid(single, ann.size);
      vpg::GtMarking gt;
      gt.label_id = obj.label_id;
      for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
          if (m.has_label(y, x, obj.label_id)) gt.cells.insert({x, y});
      gt_markings.push_back(std::move(gt));
    }
    std::vector<vpg::MarkingInstance> pred_markings;
    for (const auto& inst : pred.at("markings")) {
      vpg::MarkingInstance m;
      m.label_id = vpg::label_by_name(inst.at("label").get<std::string>()).id;
      for (const auto& cell : inst.at("cells"))
        m.cells.insert({cell.at(1).get<int>(), cell.at(0).get<int>()});
      pred_markings.push_back(std::move(m));
    }
    frame.markings = vpg::eval_markings(pred_markings, gt_markings);

    frame.gt_vp.point = ann.vp;
    frame.gt_vp.difficulty = ann.vp_difficulty;
    if (pred.contains("vp") && !pred["vp"].is_null())
      frame.pred_vp = vpg::PixelPoint{pred["vp"].at("x").get<double>(),
                                      pred["vp"].at("y").get<double>()};
  });

  // associative reductions, frame order fixed by name
  vpg::LaneEvalResult lanes;
  vpg::MarkingEvalResult markings;
  std::vector<std::optional<vpg::PixelPoint>> pred_vps;
  std::vector<vpg::VpGt> gt_vps;
  auto add_lane = [](vpg::LaneClassCounts& a, const vpg::LaneClassCounts& b) {
    a.tp_points += b.tp_points;
    a.fp_points += b.fp_points;
    a.detected_cells += b.detected_cells;
    a.gt_cells += b.gt_cells;
  };
  auto add_marking = [](vpg::MarkingClassCounts& a,
                        const vpg::MarkingClassCounts& b) {
    a.detected_gt += b.detected_gt;
    a.gt_instances += b.gt_instances;
    a.true_blobs += b.true_blobs;
    a.pred_blobs += b.pred_blobs;
  };
  for (const auto& frame : frames) {
    add_lane(lanes.overall, frame.lanes.overall);
    for (const auto& [id, c] : frame.lanes.per_class)
      add_lane(lanes.per_class[id], c);
    add_marking(markings.overall, frame.markings.overall);
    for (const auto& [id, c] : frame.markings.per_class)
      add_marking(markings.per_class[id], c);
    pred_vps.push_back(frame.pred_vp);
    gt_vps.push_back(frame.gt_vp);
  }
  const vpg::VpRecallCurve vp_curve =
      vpg::eval_vp(pred_vps, gt_vps, cfg.vp_eval_thresholds, include_hard);

  std::ostringstream table;
  table << "Lane detection (R=" << cfg.lane_match_radius << " px)\n";
  table << std::left << std::setw(16) << "class" << std::right << std::setw(10)
        << "precision" << std::setw(10) << "recall" << std::setw(10) << "F1"
        << "\n";
  auto lane_row = [&](const std::string& name, const vpg::LaneClassCounts& c) {
    table << std::left << std::setw(16) << name << std::right << std::fixed
          << std::setprecision(4) << std::setw(10) << c.precision()
          << std::setw(10) << c.recall() << std::setw(10) << c.f1() << "\n";
  };
  for (const auto& [id, c] : lanes.per_class)
    lane_row(std::string(vpg::label_by_id(id).name), c);
  lane_row("overall", lanes.overall);
  table << "\nRoad markings\n";
  table << std::left << std::setw(16) << "class" << std::right << std::setw(10)
        << "precision" << std::setw(10) << "recall" << "\n";
  auto marking_row = [&](const std::string& name,
                         const vpg::MarkingClassCounts& c) {
    table << std::left << std::setw(16) << name << std::right << std::fixed
          << std::setprecision(4) << std::setw(10) << c.precision()
          << std::setw(10) << c.recall() << "\n";
  };
  for (const auto& [id, c] : markings.per_class)
    marking_row(std::string(vpg::label_by_id(id).name), c);
  marking_row("overall", markings.overall);

  std::ostringstream csv;
  csv << "R,recall\n";
  for (std::size_t i = 0; i < vp_curve.thresholds.size(); ++i)
    csv << vp_curve.thresholds[i] << "," << vp_curve.recalls[i] << "\n";

  json report;
  report["lanes"] = {{"precision", lanes.overall.precision()},
                     {"recall", lanes.overall.recall()},
                     {"f1", lanes.overall.f1()}};
  report["markings"] = {{"precision", markings.overall.precision()},
                        {"recall", markings.overall.recall()}};
  report["vp_recall"] = json::array();
  for (std::size_t i = 0; i < vp_curve.thresholds.size(); ++i)
    report["vp_recall"].push_back(
        {{"R", vp_curve.thresholds[i]}, {"recall", vp_curve.recalls[i]}});
  json per_class;
  for (const auto& [id, c] : lanes.per_class)
    per_class[std::string(vpg::label_by_id(id).name)] = {
        {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
  for (const auto& [id, c] : markings.per_class)
    per_class[std::string(vpg::label_by_id(id).name)] = {
        {"precision", c.precision()}, {"recall", c.recall()}};
  report["per_class"] = per_class;

  if (out_prefix.empty()) {
    std::cout << table.str() << "\n" << csv.str();
    std::cout << report.dump(2) << "\n";
  } else {
    write_json_file(out_prefix + ".json", report);
    std::ofstream(out_prefix + ".txt") << table.str();
    std::ofstream(out_prefix + "_vp_recall.csv") << csv.str();
    std::cout << table.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------

vpg::ConfidenceMap assemble_tensor(const vpg::SceneRender& scene) {
  const int h = scene.lane_map.height, w = scene.lane_map.width;
  vpg::ConfidenceMap tensor(vpg::kPostprocessChannels, h, w);
  auto copy_block = [&](const vpg::ConfidenceMap& src, int dst_from) {
    std::copy(src.data.begin(), src.data.end(),
              tensor.data.begin() +
                  static_cast<std::ptrdiff_t>(dst_from) * h * w);
  };
  copy_block(scene.vpp_map, 0);
  copy_block(scene.lane_map, vpg::kVppChannels);
  copy_block(scene.marking_map, vpg::kVppChannels + vpg::kNumLaneClasses);
  return tensor;
}

int cmd_synth(const std::string& spec_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  vpg::SceneSpec spec;
  if (spec_path.empty()) {
    // default: two straight lanes and a crosswalk
    spec.lanes = {{-1.8, 0.0, 0.08, vpg::label_by_name("dashed_white").id},
                  {1.8, 0.0, 0.08, vpg::label_by_name("single_yellow").id}};
    spec.markings = {{-1.5, 10.0, 1.5, 12.0, vpg::label_by_name("crosswalk").id}};
  } else {
    spec = vpg::scene_spec_from_json(load_json_file(spec_path));
  }
  if (seed) spec.seed = *seed;

  const vpg::SceneRender scene = vpg::render(spec);
  const fs::path out(out_dir);
  fs::create_directories(out);
  write_json_file(out / "annotation.json", vpg::to_json(scene.annotation));
  write_json_file(out / "grid_mask.json", vpg::to_json(scene.grid_mask));
  vpg::write_tensor((out / "scene.vpgt").string(), assemble_tensor(scene));
  std::cout << "rendered scene -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_netspec(const std::string& spec_path, bool strict) {
  const vpg::NetworkSpec spec =
      vpg::network_spec_from_json(load_json_file(spec_path));
  const vpg::NetspecReport report = vpg::verify_network(spec);

  std::cout << std::left << std::setw(8) << "layer" << std::setw(12)
            << "computed rf" << std::setw(12) << "declared rf" << "\n";
  for (std::size_t i = 0; i < report.computed_receptive_fields.size(); ++i) {
    std::cout << std::left << std::setw(8) << ("conv" + std::to_string(i + 1))
              << std::setw(12) << report.computed_receptive_fields[i];
    if (i < spec.declared_receptive_fields.size())
      std::cout << std::setw(12) << spec.declared_receptive_fields[i];
    std::cout << "\n";
  }
  std::cout << "output stride (computed): " << report.computed_output_stride
            << "\n";
  if (spec.declared_output_factor)
    std::cout << "output factor (declared): " << *spec.declared_output_factor
              << "\n";

  bool mismatch = false;
  if (!report.receptive_fields_match) {
    std::cout << "MISMATCH: computed receptive fields differ from declared\n";
    mismatch = true;
  }
  if (!report.output_stride_matches) {
    std::cout << "MISMATCH: computed stride product "
              << report.computed_output_stride
              << " differs from declared output factor "
              << *spec.declared_output_factor << "\n";
    mismatch = true;
  }
  if (!mismatch) std::cout << "all declared values reproduced\n";
  return (strict && mismatch) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VPGNet grid annotation, VP decoding, post-processing and "
               "evaluation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 1;
  app.add_option("--config", config_path, "pipeline config JSON")
      ->configurable(false);
  app.add_option("--jobs", jobs, "worker threads for per-frame commands");

  auto* encode = app.add_subcommand("encode",
                                    "encode annotation frames to grid and "
                                    "quadrant masks");
  std::string dataset_dir, out_dir;
  encode->add_option("dir", dataset_dir, "directory of annotation json files")
      ->required();
  encode->add_option("-o,--out", out_dir, "output directory");

  auto* decode = app.add_subcommand("decode-vp", "decode a VP from a tensor");
  std::string tensor_path;
  decode->add_option("tensor", tensor_path, "tensor file")->required();

  auto* post = app.add_subcommand("postprocess",
                                  "run lane/marking/VP post-processing on a "
                                  "tensor");
  std::string post_tensor, post_out, overlay;
  post->add_option("tensor", post_tensor, "tensor file (22 or 24 channels)")
      ->required();
  post->add_option("-o,--out", post_out, "output json path");
  post->add_option("--overlay", overlay, "write an overlay PPM image");

  auto* eval = app.add_subcommand("evaluate", "score predictions against GT");
  std::string pred_dir, gt_dir, report_prefix;
  bool exclude_hard = false;
  eval->add_option("pred", pred_dir, "prediction directory")->required();
  eval->add_option("gt", gt_dir, "ground truth directory")->required();
  eval->add_option("-o,--out", report_prefix, "report path prefix");
  eval->add_flag("--exclude-hard", exclude_hard,
                 "drop HARD frames from the VP recall curve");

  auto* synth = app.add_subcommand("synth", "render a synthetic scene");
  std::string scene_spec, synth_out;
  std::optional<std::uint64_t> seed;
  synth->add_option("-s,--spec", scene_spec, "scene spec json");
  synth->add_option("--seed", seed, "override the scene seed");
  synth->add_option("-o,--out", synth_out, "output directory")->required();

  auto* netspec = app.add_subcommand("netspec",
                                     "verify network shape arithmetic");
  std::string net_path = "data/vpgnet_table2.json";
  bool strict = false;
  netspec->add_option("spec", net_path, "layer spec json");
  netspec->add_flag("--strict", strict, "exit nonzero on any mismatch");

  CLI11_PARSE(app, argc, argv);

  try {
    const vpg::PipelineConfig cfg = load_config(config_path);
    if (encode->parsed()) return cmd_encode(dataset_dir, out_dir, cfg, jobs);
    if (decode->parsed()) return cmd_decode_vp(tensor_path, cfg);
    if (post->parsed())
      return cmd_postprocess(post_tensor, cfg, post_out, overlay);
    if (eval->parsed())
      return cmd_evaluate(pred_dir, gt_dir, cfg, report_prefix, !exclude_hard,
                          jobs);
    if (synth->parsed()) return cmd_synth(scene_spec, seed, synth_out);
    if (netspec->parsed()) return cmd_netspec(net_path, strict);
  } catch (const vpg::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const vpg::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
