#include <doctest.h>

#include <fstream>

#include "vpgrid/io.hpp"
#include "vpgrid/netspec.hpp"

using namespace vpg;

#ifndef VPGRID_SOURCE_DIR
#error "VPGRID_SOURCE_DIR must point at the repo root"
#endif

namespace {
NetworkSpec load_reference_spec() {
  std::ifstream is(std::string(VPGRID_SOURCE_DIR) + "/data/vpgnet_table2.json");
  REQUIRE(is.good());
  return network_spec_from_json(json::parse(is));
}
}  // namespace

TEST_CASE("single 1x1 conv has receptive field 1") {
  CHECK(receptive_fields({LayerSpec{1, 1, 0, std::nullopt}}) ==
        std::vector<int>{1});
}

TEST_CASE("two stacked stride-1 convs accumulate kernel spans") {
  const std::vector<LayerSpec> layers{{3, 1, 1, std::nullopt},
                                      {3, 1, 1, std::nullopt}};
  CHECK(receptive_fields(layers) == std::vector<int>{3, 5});
  CHECK(output_stride(layers) == 1);
}

TEST_CASE("strides multiply across convs and pools") {
  CHECK(output_stride({LayerSpec{3, 1, 1, std::nullopt}}) == 1);
  CHECK(output_stride({LayerSpec{3, 2, 1, PoolSpec{2, 2}}}) == 4);
  CHECK(output_stride({LayerSpec{7, 2, 0, PoolSpec{3, 2}},
                       LayerSpec{5, 2, 2, PoolSpec{3, 2}},
                       LayerSpec{3, 1, 1, PoolSpec{3, 2}}}) == 32);
}

TEST_CASE("a pool widens later layers but not its own row") {
  const std::vector<LayerSpec> layers{{3, 1, 1, PoolSpec{2, 2}},
                                      {3, 1, 1, std::nullopt}};
  // rf after conv1 = 3; pool adds 1*1 then doubles jump; conv2 adds 2*2
  CHECK(receptive_fields(layers) == std::vector<int>{3, 8});
}

TEST_CASE("empty layer lists and bad fields are rejected") {
  CHECK_THROWS_AS(receptive_fields({}), ValidationError);
  CHECK_THROWS_AS(output_stride({}), ValidationError);
  CHECK_THROWS_AS(receptive_fields({LayerSpec{0, 1, 0, std::nullopt}}),
                  ValidationError);
  CHECK_THROWS_AS(receptive_fields({LayerSpec{3, 0, 0, std::nullopt}}),
                  ValidationError);
  CHECK_THROWS_AS(receptive_fields({LayerSpec{3, 1, 0, PoolSpec{0, 2}}}),
                  ValidationError);
}

TEST_CASE("receptive fields are monotone nondecreasing") {
  const NetworkSpec spec = load_reference_spec();
  const auto rf = receptive_fields(spec.layers);
  for (std::size_t i = 1; i < rf.size(); ++i) CHECK(rf[i] >= rf[i - 1]);
}

TEST_CASE("reference stack reproduces the published receptive-field row") {
  const NetworkSpec spec = load_reference_spec();
  REQUIRE(spec.layers.size() == 8);
  const std::vector<int> expected{11, 51, 99, 131, 163, 355, 355, 355};
  CHECK(receptive_fields(spec.layers) == expected);
  CHECK(spec.declared_receptive_fields == expected);
}

TEST_CASE("reference stack stride disagrees with the declared factor") {
  const NetworkSpec spec = load_reference_spec();
  CHECK(output_stride(spec.layers) == 32);
  REQUIRE(spec.declared_output_factor.has_value());
  CHECK(*spec.declared_output_factor == 8);

  const NetspecReport report = verify_network(spec);
  CHECK(report.receptive_fields_match);
  CHECK_FALSE(report.output_stride_matches);
  CHECK(report.computed_output_stride == 32);
}

TEST_CASE("verify_network accepts consistent declarations") {
  NetworkSpec spec;
  spec.layers = {{3, 2, 1, std::nullopt}, {3, 2, 1, std::nullopt}};
  spec.declared_receptive_fields = {3, 7};
  spec.declared_output_factor = 4;
  const NetspecReport report = verify_network(spec);
  CHECK(report.receptive_fields_match);
  CHECK(report.output_stride_matches);
}
