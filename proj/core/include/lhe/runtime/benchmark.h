// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lhe/ckks/ciphertext.h"
#include "lhe/model/graph.h"

namespace lhe::runtime {

// Latent geometries for downsampling factors 4, 8, 16 and 32 (largest first).
std::vector<model::Geometry> standard_geometries();
// Parses "128x128x2,64x64x3"; throws ShapeError on malformed entries.
std::vector<model::Geometry> parse_geometries(const std::string& text);

// Fixed small graph used for geometry sweeps: 3x3 conv to 4 channels,
// polyact, global pooling, linear to 2 classes. Deterministic weights.
model::ModelGraph sweep_graph(model::Geometry input);

struct BenchmarkPoint {
  model::Geometry geometry;
  std::uint32_t ring_degree = 0;
  int levels = 0;
  std::vector<double> seconds;  // server-side inference, one entry per repetition
  double median_seconds = 0;
};

struct BenchmarkReport {
  ckks::Backend backend = ckks::Backend::kReal;
  std::vector<BenchmarkPoint> points;
  // Medians strictly decrease along `points`.
  bool strictly_decreasing() const;
  std::string to_json() const;
};

struct BenchmarkOptions {
  int repetitions = 5;
  ckks::Backend backend = ckks::Backend::kReal;
  std::uint64_t seed = 1;
};

// For each geometry: sizes a ring to the slot demand with a chain deep
// enough for the whole graph, generates exactly the needed keys and times
// server_infer with a monotonic clock.
BenchmarkReport benchmark(const std::function<model::ModelGraph(model::Geometry)>& make_graph,
                          const std::vector<model::Geometry>& geometries, const BenchmarkOptions& options);

double median(std::vector<double> values);

}  // namespace lhe::runtime
