// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/runtime/benchmark.h"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lhe/ckks/keys.h"
#include "lhe/common/error.h"
#include "lhe/runtime/runtime.h"

namespace lhe::runtime {
namespace {

// Published per-sample ResNet20 latencies, kept as annotations only; they were
// measured on different hardware.
constexpr double kReferencePlaintextMs = 6.23;
constexpr double kReferenceEncryptedMs = 76913.72;

int total_depth(const model::ModelGraph& g) {
  int depth = 0;
  for (std::size_t i = 0, end = 0; i < g.layers.size(); i = end) depth += model::item_cost(g, i, end);
  return depth;
}

}  // namespace

std::vector<model::Geometry> standard_geometries() { return {{128, 128, 2}, {64, 64, 3}, {32, 32, 4}, {16, 16, 8}}; }

std::vector<model::Geometry> parse_geometries(const std::string& text) {
  std::vector<model::Geometry> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    start = comma + 1;
    model::Geometry g;
    char x1 = 0, x2 = 0;
    std::stringstream is(item);
    if (!(is >> g.height >> x1 >> g.width >> x2 >> g.channels) || x1 != 'x' || x2 != 'x' || !is.eof() ||
        g.height == 0 || g.width == 0 || g.channels == 0) {
      throw ShapeError("geometry '" + item + "' is not of the form HxWxC");
    }
    out.push_back(g);
  }
  return out;
}

model::ModelGraph sweep_graph(model::Geometry input) {
  using model::LayerKind;
  model::ModelGraph g;
  g.input = input;
  g.num_classes = 2;
  std::mt19937_64 rng(input.height * 1000003ull + input.channels);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  model::LayerSpec conv;
  conv.kind = LayerKind::kConv;
  conv.name = "conv";
  conv.conv.in_channels = input.channels;
  conv.conv.out_channels = 4;
  conv.conv.kernel_h = conv.conv.kernel_w = 3;
  conv.conv.weights.resize(4ull * input.channels * 9);
  for (auto& v : conv.conv.weights) v = u(rng);
  conv.conv.bias.assign(4, 0.05);
  g.layers.push_back(conv);
  model::LayerSpec act;
  act.kind = LayerKind::kPolyact;
  act.name = "act";
  act.act = tensor::ActivationCoeffs::polyact(0.125, 0.5, 0.25);
  g.layers.push_back(act);
  model::LayerSpec pool;
  pool.kind = LayerKind::kGlobalAvgPool;
  pool.name = "pool";
  g.layers.push_back(pool);
  model::LayerSpec fc;
  fc.kind = LayerKind::kLinear;
  fc.name = "fc";
  fc.linear.in_features = 4;
  fc.linear.out_features = 2;
  fc.linear.weights.resize(8);
  for (auto& v : fc.linear.weights) v = u(rng);
  fc.linear.bias.assign(2, 0.0);
  g.layers.push_back(fc);
  g.validate();
  return g;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

bool BenchmarkReport::strictly_decreasing() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].median_seconds < points[i - 1].median_seconds)) return false;
  return !points.empty();
}

std::string BenchmarkReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"geometry", std::to_string(p.geometry.height) + "x" + std::to_string(p.geometry.width) + "x" +
                                    std::to_string(p.geometry.channels)},
                   {"ring_degree", p.ring_degree},
                   {"levels", p.levels},
                   {"seconds", p.seconds},
                   {"median_ms", p.median_seconds * 1e3}});
  }
  nlohmann::json j = {{"backend", backend == ckks::Backend::kReal ? "real" : "mock"},
                      {"points", pts},
                      {"strictly_decreasing", strictly_decreasing()},
                      {"reference_resnet20_ms",
                       {{"plaintext", kReferencePlaintextMs},
                        {"encrypted", kReferenceEncryptedMs},
                        {"note", "published figures from other hardware; annotation only, not a target"}}}};
  return j.dump(2);
}

BenchmarkReport benchmark(const std::function<model::ModelGraph(model::Geometry)>& make_graph,
                          const std::vector<model::Geometry>& geometries, const BenchmarkOptions& options) {
  if (options.repetitions < 1) throw ParamError("benchmark needs at least one repetition");
  BenchmarkReport report;
  report.backend = options.backend;
  std::uint64_t seed = options.seed;
  for (const auto& geo : geometries) {
    const auto graph = make_graph(geo);
    if (!(graph.input == geo)) throw ShapeError("benchmark graph input does not match the requested geometry");
    const int depth = total_depth(graph);
    std::vector<int> bits(static_cast<std::size_t>(depth) + 1, 40);
    bits[0] = 60;
    const auto params = ckks::CkksParams::for_slot_demand(geo.height * geo.width, bits);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    tensor::Tensor latent(geo.height, geo.width, geo.channels);
    for (auto& v : latent.data) v = u(rng);

    BenchmarkPoint point;
    point.geometry = geo;
    point.ring_degree = params.ring_degree;
    point.levels = depth;
    auto run = [&](ClientContext& client, const ServerContext& server) {
      for (int r = 0; r < options.repetitions; ++r) {
        const auto request = client.encrypt(latent);
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = server_infer(server, request, [&](const RefreshRequest& q) { return client.refresh(q); });
        point.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
    };
    if (options.backend == ckks::Backend::kMock) {
      ServerContext server = ServerContext::mock(params, graph);
      ClientContext client = ClientContext::mock(params, geo, graph.num_classes, seed_from_u64(seed));
      run(client, server);
    } else {
      const auto planned = model::plan_levels(graph, params);
      auto keys = ckks::keygen(params, model::required_rotation_steps(planned, params), seed_from_u64(seed));
      ClientContext client(std::move(keys), geo, graph.num_classes, seed_from_u64(seed + 1));
      ServerContext server(client.handshake(), graph);
      run(client, server);
    }
    point.median_seconds = median(point.seconds);
    report.points.push_back(std::move(point));
    seed += 7;
  }
  return report;
}

}  // namespace lhe::runtime
