// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "json.hpp"
#include "lhe/common/error.h"
#include "lhe/runtime/benchmark.h"

namespace lhe::runtime {
namespace {

TEST(Benchmark, ParsesGeometryLists) {
  const auto g = parse_geometries("128x128x2,16x16x8");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0], (model::Geometry{128, 128, 2}));
  EXPECT_EQ(g[1], (model::Geometry{16, 16, 8}));
  for (const char* bad : {"", "12x12", "8x8x0", "axbxc", "8x8x2,", "8x8x2x1"}) {
    EXPECT_THROW(parse_geometries(bad), ShapeError) << bad;
  }
}

TEST(Benchmark, StandardGeometriesShrinkWithDownsampling) {
  const auto g = standard_geometries();
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], (model::Geometry{128, 128, 2}));
  EXPECT_EQ(g[3], (model::Geometry{16, 16, 8}));
}

TEST(Benchmark, Median) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(median({}), 0);
}

TEST(Benchmark, TrendCheck) {
  BenchmarkReport r;
  for (double s : {3.0, 2.0, 1.0}) r.points.push_back({{}, 0, 0, {s}, s});
  EXPECT_TRUE(r.strictly_decreasing());
  r.points[2].median_seconds = 2.0;
  EXPECT_FALSE(r.strictly_decreasing());
  EXPECT_FALSE(BenchmarkReport{}.strictly_decreasing());
}

TEST(Benchmark, MockSweepSizesRingsToSlotDemand) {
  BenchmarkOptions o;
  o.backend = ckks::Backend::kMock;
  const auto r = benchmark(sweep_graph, standard_geometries(), o);
  ASSERT_EQ(r.points.size(), 4u);
  const std::uint32_t rings[] = {32768, 8192, 2048, 512};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.points[i].ring_degree, rings[i]);
    EXPECT_EQ(r.points[i].seconds.size(), 5u);
    EXPECT_EQ(r.points[i].median_seconds, median(r.points[i].seconds));
  }
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["backend"], "mock");
  EXPECT_EQ(j["points"].size(), 4u);
  EXPECT_DOUBLE_EQ(j["reference_resnet20_ms"]["encrypted"].get<double>(), 76913.72);
  EXPECT_DOUBLE_EQ(j["reference_resnet20_ms"]["plaintext"].get<double>(), 6.23);
}

TEST(Benchmark, MockIsFasterThanReal) {
  const std::vector<model::Geometry> g{{16, 16, 2}};
  BenchmarkOptions o;
  o.repetitions = 3;
  const auto real = benchmark(sweep_graph, g, o);
  o.backend = ckks::Backend::kMock;
  const auto mock = benchmark(sweep_graph, g, o);
  EXPECT_LT(mock.points[0].median_seconds, real.points[0].median_seconds);
  EXPECT_EQ(real.points[0].levels, mock.points[0].levels);
}

TEST(Benchmark, RejectsMismatchedGraphAndZeroReps) {
  const auto wrong = [](model::Geometry) { return sweep_graph({8, 8, 1}); };
  EXPECT_THROW(benchmark(wrong, {{16, 16, 2}}, {}), ShapeError);
  BenchmarkOptions o;
  o.repetitions = 0;
  EXPECT_THROW(benchmark(sweep_graph, {{16, 16, 2}}, o), ParamError);
}

}  // namespace
}  // namespace lhe::runtime
