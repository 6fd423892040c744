// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a ResNet20-latent weight bundle with batch norm calibrated on
// random latents, plus optional sample latent files.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "lhe/common/error.h"
#include "lhe/model/bundle.h"
#include "lhe/model/resnet.h"
#include "lhe/tensor/tensor.h"

namespace {

using namespace lhe;

std::vector<tensor::Tensor> random_latents(model::Geometry g, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<tensor::Tensor> out;
  for (std::size_t i = 0; i < count; ++i) {
    tensor::Tensor t(g.height, g.width, g.channels);
    // Latents are stored as float32; keep the samples representable.
    for (auto& v : t.data) v = static_cast<float>(u(rng));
    out.push_back(std::move(t));
  }
  return out;
}

// Largest intermediate magnitude over held-out latents; infinite if any
// value overflows.
double peak_activation(const model::ModelGraph& g, const std::vector<tensor::Tensor>& samples) {
  double peak = 0;
  for (const auto& x : samples) {
    model::plaintext_forward(g, x, [&](std::size_t, const tensor::Tensor& t, const tensor::Tensor*) {
      for (float v : t.data) peak = std::isfinite(v) ? std::max(peak, static_cast<double>(std::abs(v))) : INFINITY;
    });
  }
  return peak;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build a demo ResNet20-latent bundle"};
  std::string out, latent_dir;
  std::vector<std::uint32_t> widths{8, 16, 32};
  std::vector<std::uint32_t> input{32, 32, 4};
  bool se = false;
  std::uint64_t seed = 1;
  std::size_t calibration = 32, latents = 0;
  std::uint32_t classes = 14;
  std::size_t holdout = 64;
  double max_peak = 12.0;
  app.add_option("--out", out, "Bundle path")->required();
  app.add_option("--widths", widths, "Stage widths")->expected(3);
  app.add_option("--input", input, "Latent geometry H W C")->expected(3);
  app.add_option("--classes", classes, "Number of classes");
  app.add_flag("--se", se, "Add squeeze-excitation to every block");
  app.add_option("--seed", seed, "Weight seed");
  app.add_option("--calibration", calibration, "Random latents used to calibrate batch norm");
  app.add_option("--holdout", holdout, "Held-out latents checked for bounded activations");
  app.add_option("--max-peak", max_peak, "Reject the bundle if any held-out activation exceeds this");
  app.add_option("--latents", latents, "Also write this many sample latents");
  app.add_option("--latent-dir", latent_dir, "Directory for sample latents");
  CLI11_PARSE(app, argc, argv);

  try {
    model::ResNetOptions o;
    o.input = {input[0], input[1], input[2]};
    o.num_classes = classes;
    o.widths = {widths[0], widths[1], widths[2]};
    o.squeeze_excite = se;
    o.seed = seed;
    model::Bundle b;
    b.graph = model::build_resnet20_latent(o);
    model::calibrate_batchnorm(b.graph, random_latents(o.input, calibration, seed + 1000));
    const double peak = peak_activation(b.graph, random_latents(o.input, holdout, seed + 3000));
    if (!(peak <= max_peak)) {
      throw ShapeError("activations reach " + std::to_string(peak) + " on held-out latents (limit " +
                       std::to_string(max_peak) + "); try another seed or activation");
    }
    b.metadata["architecture"] = se ? "resnet20-latent-se" : "resnet20-latent";
    b.metadata["widths"] = std::to_string(widths[0]) + "," + std::to_string(widths[1]) + "," + std::to_string(widths[2]);
    b.metadata["seed"] = std::to_string(seed);
    b.metadata["calibration"] = std::to_string(calibration) + " uniform[-1,1] latents";
    model::save_bundle(out, b);
    std::cout << "wrote " << out << " (" << b.graph.layers.size() << " layers)\n";
    if (latents > 0) {
      if (latent_dir.empty()) throw ParamError("--latents needs --latent-dir");
      std::filesystem::create_directories(latent_dir);
      const auto samples = random_latents(o.input, latents, seed + 2000);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto path = (std::filesystem::path(latent_dir) / ("latent_" + std::to_string(i) + ".ltnt")).string();
        tensor::save_latent(path, samples[i]);
      }
      std::cout << "wrote " << latents << " latents to " << latent_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
