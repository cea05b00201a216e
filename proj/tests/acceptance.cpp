// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each check is wired to an independent expectation (hand-computed
// value, brute-force oracle, or frozen regression threshold), never to the
// output of the code under test.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "vpgrid/io.hpp"
#include "vpgrid/vpgrid.hpp"

using namespace vpg;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail = "") {
  std::printf("[%s] %2d %s%s%s\n", ok ? "pass" : "FAIL", id, name,
              detail.empty() ? "" : ": ", detail.c_str());
  if (!ok) ++g_failures;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---- criterion 1: published receptive-field row ---------------------------

void check_netspec() {
  const auto start = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    std::ifstream is(std::string(VPGRID_SOURCE_DIR) + "/data/vpgnet_table2.json");
    const NetworkSpec spec = network_spec_from_json(json::parse(is));
    const std::vector<int> expected{11, 51, 99, 131, 163, 355, 355, 355};
    ok = receptive_fields(spec.layers) == expected &&
         output_stride(spec.layers) == 32 && elapsed_ms(start) < 1000.0;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  report(1, "receptive fields of the reference stack", ok, detail);
}

// ---- criterion 2: encode->decode localization -----------------------------

void check_vp_roundtrip() {
  const auto start = Clock::now();
  const ImageSize size{640, 480, 8};
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ux(0, size.width - 1e-6);
  std::uniform_real_distribution<double> uy(0, size.height - 1e-6);
  int ok_count = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const PixelPoint vp{ux(rng), uy(rng)};
    const Cell truth = pixel_to_cell(vp, size);
    const Cell got = decode_vp(one_hot(encode_quadrant(vp, size))).location;
    if (std::abs(got.x - truth.x) <= 1 && std::abs(got.y - truth.y) <= 1)
      ++ok_count;
  }
  const double ms = elapsed_ms(start);
  report(2, "decoded VP within one cell of the encoded VP",
         ok_count == trials && ms < 10000.0,
         std::to_string(ok_count) + "/" + std::to_string(trials) + ", " +
             std::to_string(int(ms)) + " ms");
}

// ---- criterion 3: average-probability arithmetic --------------------------

void check_p_avg() {
  auto uniform = [](float p0, float q) {
    ConfidenceMap m(5, 60, 80);
    for (int y = 0; y < 60; ++y)
      for (int x = 0; x < 80; ++x) {
        m.at(0, y, x) = p0;
        for (int n = 1; n < 5; ++n) m.at(n, y, x) = q;
      }
    return m;
  };
  const bool ok = std::abs(p_avg(uniform(0.0f, 0.25f)) - 0.25) < 1e-12 &&
                  std::abs(p_avg(uniform(1.0f, 0.0f)) - 0.0) < 1e-12 &&
                  std::abs(p_avg(uniform(0.5f, 0.125f)) - 0.125) < 1e-12 &&
                  std::abs(decode_vp(uniform(0.25f, 0.1875f)).existence - 0.75) <
                      1e-6;
  report(3, "average probability and existence identities", ok);
}

// ---- criterion 4: end-to-end synthetic recovery ---------------------------

SceneSpec two_lane_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.lanes = {{-1.8, 0.0, 0.08, 1}, {+1.8, 0.0, 0.08, 3}};
  spec.seed = seed;
  return spec;
}

void check_synthetic_pipeline() {
  std::string detail;
  const OracleReport clean = oracle_eval(two_lane_scene(0));
  const bool clean_ok = clean.lane_f1 == 1.0 && clean.vp_cell_error >= 0 &&
                        clean.vp_cell_error <= 1;
  detail = "clean F1 = " + std::to_string(clean.lane_f1);

  double sum_f1 = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SceneSpec spec = two_lane_scene(seed);
    spec.noise_sigma = 0.1;
    sum_f1 += oracle_eval(spec).lane_f1;
  }
  const double mean_f1 = sum_f1 / 100.0;
  // frozen regression bound for the sigma = 0.1 setting (measured 0.9999)
  const bool noisy_ok = mean_f1 >= 0.99;
  detail += ", noisy mean F1 = " + std::to_string(mean_f1);
  report(4, "synthetic scene recovery", clean_ok && noisy_ok, detail);
}

// ---- criterion 5: clustering vs a brute-force oracle ----------------------

void check_clustering() {
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> u01(0, 1);
  int bad = 0;
  const double thr = 12.0;
  for (int trial = 0; trial < 1000; ++trial) {
    // well-separated vertical chains: intra-chain step < thr, chains > 2*thr
    // apart, so the bin-stack result must equal distance-threshold components
    const int chains = 1 + int(rng() % 4);
    std::vector<PixelPoint> pts;
    std::vector<int> truth;
    double base_x = 20;
    for (int c = 0; c < chains; ++c) {
      const int n = 3 + int(rng() % 8);
      double y = 40 + 30 * u01(rng);
      double x = base_x + 4 * u01(rng);
      for (int i = 0; i < n; ++i) {
        pts.push_back({x, y});
        truth.push_back(c);
        y += 4 + 6 * u01(rng);         // step <= 10 < thr
        x += 3 * (u01(rng) - 0.5);     // lateral jitter <= 1.5
      }
      base_x += 2 * thr + 10 + 20 * u01(rng);
    }
    // feed the points in a scrambled order; clustering sorts internally
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<PixelPoint> shuffled(pts.size());
    std::vector<int> truth_shuffled(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      shuffled[i] = pts[order[i]];
      truth_shuffled[i] = truth[order[i]];
    }
    pts = shuffled;
    truth = truth_shuffled;
    const auto bins = cluster_points(pts, thr);
    // every bin must be label-pure and the bin count must match
    std::set<int> seen;
    bool pure = bins.size() == std::size_t(chains);
    for (const auto& bin : bins) {
      std::set<int> labels;
      for (int idx : bin) labels.insert(truth[std::size_t(idx)]);
      pure = pure && labels.size() == 1;
      seen.insert(*labels.begin());
    }
    std::size_t covered = 0;
    for (const auto& bin : bins) covered += bin.size();
    if (!pure || seen.size() != std::size_t(chains) || covered != pts.size())
      ++bad;
  }
  report(5, "bin-stack clustering matches the separation oracle", bad == 0,
         std::to_string(bad) + " bad of 1000");
}

// ---- criterion 6: component merging vs a brute-force oracle ---------------

std::vector<std::set<Cell>> bfs_components(const std::set<Cell>& cells) {
  std::set<Cell> remaining = cells;
  std::vector<std::set<Cell>> out;
  while (!remaining.empty()) {
    std::set<Cell> comp;
    std::queue<Cell> q;
    q.push(*remaining.begin());
    remaining.erase(remaining.begin());
    while (!q.empty()) {
      const Cell c = q.front();
      q.pop();
      comp.insert(c);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          auto it = remaining.find({c.x + dx, c.y + dy});
          if (it != remaining.end()) {
            q.push(*it);
            remaining.erase(it);
          }
        }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

void check_merge() {
  const ImageSize size{640, 480, 8};
  std::mt19937 rng(808);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::bernoulli_distribution fg(0.02 + 0.18 * (trial % 10) / 10.0);
    std::set<Cell> cells;
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x)
        if (fg(rng)) cells.insert({x, y});
    std::vector<std::set<Cell>> got;
    for (const auto& inst : merge_cells(cells, 11, size))
      got.push_back(inst.cells);
    auto want = bfs_components(cells);
    auto lt = [](const std::set<Cell>& a, const std::set<Cell>& b) {
      if (a.empty() || b.empty()) return b.empty() < a.empty();
      return *a.begin() < *b.begin();
    };
    std::sort(got.begin(), got.end(), lt);
    std::sort(want.begin(), want.end(), lt);
    if (got != want) ++bad;
  }
  report(6, "instance merging matches brute-force components", bad == 0,
         std::to_string(bad) + " bad of 1000");
}

// ---- criterion 7: loss balancing and gradients ----------------------------

void check_losses() {
  bool ok = true;
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> ul(0.05, 8.0);
  for (int trial = 0; trial < 100; ++trial) {
    const TaskLosses l{ul(rng), ul(rng), ul(rng), ul(rng)};
    const TaskWeights w = balance_weights(l);
    const auto lv = l.values(), wv = w.values();
    for (int i = 0; i < 4; ++i)
      ok = ok && std::abs(wv[i] * lv[i] - 1.0) < 1e-12;
  }

  std::uniform_real_distribution<double> up(0.05, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 10 && ok; ++trial) {
    ConfidenceMap pred(5, 2, 3);
    for (auto& v : pred.data) v = float(up(rng));
    std::vector<int> gt(6);
    for (auto& g : gt) g = int(rng() % 5);
    const std::set<Cell> mask{{0, 0}, {1, 1}, {2, 0}};
    const ConfidenceMap grad = cross_entropy_grad(pred, gt, mask);
    const double eps = 1e-4;
    for (const Cell& cell : mask) {
      for (int c = 0; c < 5 && checked < 100; ++c) {
        ConfidenceMap up_m = pred, dn_m = pred;
        up_m.at(c, cell.y, cell.x) += float(eps);
        dn_m.at(c, cell.y, cell.x) -= float(eps);
        const double fd = (cross_entropy(up_m, gt, mask) -
                           cross_entropy(dn_m, gt, mask)) / (2 * eps);
        const double g = grad.at(c, cell.y, cell.x);
        const double rel = std::abs(g - fd) / std::max(1.0, std::abs(fd));
        ok = ok && rel < 1e-4 * 10;  // 1e-3 absolute-relative mix for f32 maps
        ++checked;
      }
    }
  }
  report(7, "weight balancing exact, gradients match finite differences", ok,
         std::to_string(checked) + " gradient entries");
}

// ---- criterion 8: metric decision rules -----------------------------------

void check_metric_rules() {
  std::vector<GtMarking> gt(1);
  gt[0].label_id = 11;
  for (int x = 0; x < 8; ++x) gt[0].cells.insert({x, 0});
  MarkingInstance blob;
  blob.label_id = 11;
  blob.cells = {{0, 0}, {1, 0}, {2, 0}, {9, 9}};  // 3/4
  const bool three_quarters = eval_markings({blob}, gt).overall.true_blobs == 1;
  blob.cells = {{0, 0}, {1, 0}, {9, 9}, {9, 8}};  // exactly half
  const bool half = eval_markings({blob}, gt).overall.true_blobs == 0;

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coord(0, 639);
  std::vector<VpGt> vp_gt;
  std::vector<std::optional<PixelPoint>> vp_pred;
  for (int i = 0; i < 200; ++i) {
    vp_gt.push_back({PixelPoint{coord(rng), coord(rng)},
                     rng() % 2 ? VpDifficulty::kEasy : VpDifficulty::kHard});
    vp_pred.push_back(rng() % 5 ? std::optional<PixelPoint>(
                                      PixelPoint{coord(rng), coord(rng)})
                                : std::nullopt);
  }
  std::vector<double> thresholds;
  for (int r = 2; r <= 1024; r *= 2) thresholds.push_back(r);
  const auto curve = eval_vp(vp_pred, vp_gt, thresholds);
  bool monotone = true;
  for (std::size_t i = 1; i < curve.recalls.size(); ++i)
    monotone = monotone && curve.recalls[i] >= curve.recalls[i - 1];

  report(8, "strict majority blob rule and monotone VP recall",
         three_quarters && half && monotone);
}

// ---- criterion 9: post-processing latency ---------------------------------

void check_latency() {
  SceneSpec spec = two_lane_scene(7);
  spec.markings = {{-1.5, 12.0, 1.5, 14.0, 14}, {0.3, 8.0, 1.0, 9.5, 11}};
  const SceneRender scene = render(spec);

  ConfidenceMap tensor(24, 60, 80);
  auto copy_block = [&](const ConfidenceMap& src, int dst0) {
    for (int c = 0; c < src.channels; ++c)
      for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 80; ++x)
          tensor.at(dst0 + c, y, x) = src.at(c, y, x);
  };
  copy_block(scene.vpp_map, 0);
  copy_block(scene.lane_map, 5);
  copy_block(scene.marking_map, 5 + kNumLaneClasses);

  std::vector<double> times;
  std::size_t sink = 0;
  for (int run = 0; run < 100; ++run) {
    const auto start = Clock::now();
    ConfidenceMap vpp(5, 60, 80), lanes(8, 60, 80), marks(9, 60, 80);
    auto slice = [&](ConfidenceMap& dst, int src0) {
      std::copy_n(tensor.data.begin() + std::size_t(src0) * 60 * 80,
                  dst.data.size(), dst.data.begin());
    };
    slice(vpp, 0);
    slice(lanes, 5);
    slice(marks, 13);
    const VpDecodeResult vp = decode_vp(vpp);
    std::optional<PixelPoint> vp_pixel;
    if (vp.existence >= 0.5)
      vp_pixel = cell_center(vp.location, spec.size);
    const auto curves = extract_lanes(lanes, vp_pixel, spec.size);
    const auto instances = extract_markings(marks, 0.5, spec.size);
    sink += curves.size() + instances.size();
    times.push_back(elapsed_ms(start));
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  report(9, "decode and post-process latency", median <= 20.0 && sink > 0,
         "median " + std::to_string(median) + " ms");
}

// ---- criterion 10: determinism and serialization --------------------------

void check_determinism() {
  SceneSpec spec = two_lane_scene(42);
  spec.noise_sigma = 0.05;
  spec.clutter_density = 0.005;
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const SceneRender scene = render(spec);
    const VpDecodeResult vp = decode_vp(scene.vpp_map);
    std::optional<PixelPoint> vp_pixel;
    if (vp.existence >= 0.5)
      vp_pixel = cell_center(vp.location, spec.size);
    json j;
    j["vp"] = {vp.location.y, vp.location.x, vp.existence};
    for (const auto& c : extract_lanes(scene.lane_map, vp_pixel, spec.size))
      j["lanes"].push_back(to_json(c));
    for (const auto& m : extract_markings(scene.marking_map, 0.5, spec.size))
      j["markings"].push_back(to_json(m));
    outputs[run] = j.dump();
  }

  std::mt19937 rng(4242);
  std::uniform_real_distribution<float> u(-3, 3);
  ConfidenceMap map(22, 60, 80);
  for (auto& v : map.data) v = u(rng);
  std::ostringstream os(std::ios::binary);
  write_tensor(os, map);
  std::istringstream is(os.str(), std::ios::binary);
  const ConfidenceMap back = read_tensor(is);
  std::ostringstream os2(std::ios::binary);
  write_tensor(os2, back);

  report(10, "bit-exact determinism and tensor round trip",
         outputs[0] == outputs[1] && !outputs[0].empty() &&
             os.str() == os2.str());
}

}  // namespace

int main() {
  check_netspec();
  check_vp_roundtrip();
  check_p_avg();
  check_synthetic_pipeline();
  check_clustering();
  check_merge();
  check_losses();
  check_metric_rules();
  check_latency();
  check_determinism();
  std::printf("%s (%d failure%s)\n", g_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures ? 1 : 0;
}
