#include <doctest.h>

#include <queue>
#include <random>

#include "vpgrid/marking_post.hpp"

using namespace vpg;

namespace {

const ImageSize kSize{640, 480, 8};

// brute-force 8-connected component labeling oracle
std::vector<std::set<Cell>> brute_force_components(const std::set<Cell>& cells) {
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
          const Cell n{c.x + dx, c.y + dy};
          auto it = remaining.find(n);
          if (it != remaining.end()) {
            remaining.erase(it);
            q.push(n);
          }
        }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

bool same_components(std::vector<std::set<Cell>> a,
                     std::vector<std::set<Cell>> b) {
  auto lt = [](const std::set<Cell>& l, const std::set<Cell>& r) {
    return *l.begin() < *r.begin();
  };
  std::sort(a.begin(), a.end(), lt);
  std::sort(b.begin(), b.end(), lt);
  return a == b;
}

}  // namespace

TEST_CASE("sample_cells thresholding") {
  ConfidenceMap map(9, 60, 80);
  map.at(3, 10, 20) = 0.9f;  // channel 3 = straight_arrow (id 11)
  auto cells = sample_cells(map, 0.5, kSize);
  REQUIRE(cells.size() == 1);
  CHECK(cells[11] == std::set<Cell>{{20, 10}});

  ConfidenceMap low(9, 60, 80, 0.4f);
  CHECK(sample_cells(low, 0.5, kSize).empty());
  CHECK_THROWS_AS(sample_cells(map, 0.0, kSize), ValidationError);
}

TEST_CASE("sample_cells re-anchors through the regression map") {
  ConfidenceMap map(9, 3, 3);
  map.at(3, 1, 1) = 0.9f;
  GridRegressionMap reg(3, 3);
  reg.dx[reg.index(1, 1)] = 8.0;  // one cell to the right
  const ImageSize small{24, 24, 8};
  auto cells = sample_cells(map, 0.5, small, &reg);
  CHECK(cells[11] == std::set<Cell>{{2, 1}});
}

TEST_CASE("2x2 block merges into one boxed instance") {
  const int arrow = label_by_name("straight_arrow").id;
  std::set<Cell> cells{{10, 10}, {11, 10}, {10, 11}, {11, 11}};
  const auto instances = merge_cells(cells, arrow, kSize);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].cells == cells);
  REQUIRE(instances[0].box.has_value());
  CHECK(instances[0].box->x1 - instances[0].box->x0 == 16);
  CHECK(instances[0].box->y1 - instances[0].box->y0 == 16);
  CHECK(instances[0].score == doctest::Approx(1.0));
}

TEST_CASE("separated cells form separate instances") {
  const int stop = label_by_name("stop_line").id;
  const auto instances = merge_cells({{5, 5}, {9, 5}}, stop, kSize);
  CHECK(instances.size() == 2);
}

TEST_CASE("crosswalk bypasses box merging") {
  const int crosswalk = label_by_name("crosswalk").id;
  std::set<Cell> scattered;
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> coord(0, 50);
  while (scattered.size() < 10) scattered.insert({coord(rng), coord(rng)});
  const auto instances = merge_cells(scattered, crosswalk, kSize);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].cells == scattered);
  CHECK_FALSE(instances[0].box.has_value());
}

TEST_CASE("merge matches brute-force 8-connected labeling on random masks") {
  std::mt19937 rng(17);
  std::bernoulli_distribution fg(0.08);
  const int arrow = label_by_name("straight_arrow").id;
  for (int trial = 0; trial < 100; ++trial) {
    std::set<Cell> cells;
    for (int y = 0; y < 60; ++y)
      for (int x = 0; x < 80; ++x)
        if (fg(rng)) cells.insert({x, y});
    const auto instances = merge_cells(cells, arrow, kSize);
    std::vector<std::set<Cell>> got;
    for (const auto& inst : instances) got.push_back(inst.cells);
    REQUIRE(same_components(got, brute_force_components(cells)));
  }
}

TEST_CASE("merge output partitions its input") {
  std::mt19937 rng(29);
  std::bernoulli_distribution fg(0.2);
  const int bump = label_by_name("speed_bump").id;
  for (int trial = 0; trial < 50; ++trial) {
    std::set<Cell> cells;
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x)
        if (fg(rng)) cells.insert({x, y});
    const auto instances = merge_cells(cells, bump, kSize);
    std::set<Cell> seen;
    std::size_t total = 0;
    for (const auto& inst : instances) {
      total += inst.cells.size();
      seen.insert(inst.cells.begin(), inst.cells.end());
    }
    CHECK(total == cells.size());
    CHECK(seen == cells);
  }
}

TEST_CASE("merging an emitted instance is idempotent") {
  std::mt19937 rng(41);
  std::bernoulli_distribution fg(0.15);
  const int arrow = label_by_name("left_arrow").id;
  std::set<Cell> cells;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      if (fg(rng)) cells.insert({x, y});
  for (const auto& inst : merge_cells(cells, arrow, kSize)) {
    const auto again = merge_cells(inst.cells, arrow, kSize);
    REQUIRE(again.size() == 1);
    CHECK(again[0].cells == inst.cells);
    CHECK(again[0].box == inst.box);
  }
}

TEST_CASE("extract_markings composes thresholding and merging") {
  ConfidenceMap map(9, 60, 80);
  // straight arrow blob (channel 3) and crosswalk band (channel 6)
  for (int y = 40; y < 44; ++y)
    for (int x = 30; x < 33; ++x) map.at(3, y, x) = 0.8f;
  for (int x = 10; x < 60; x += 4) map.at(6, 50, x) = 0.7f;
  const auto instances = extract_markings(map, 0.5, kSize);
  REQUIRE(instances.size() == 2);
  CHECK(instances[0].label_id == label_by_name("straight_arrow").id);
  CHECK(instances[0].cells.size() == 12);
  CHECK(instances[0].score == doctest::Approx(0.8));
  CHECK(instances[1].label_id == label_by_name("crosswalk").id);
  CHECK_FALSE(instances[1].box.has_value());
}
