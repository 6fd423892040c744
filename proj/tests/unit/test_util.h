// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <set>

#include "lhe/ckks/evaluator.h"
#include "lhe/tensor/layers.h"
#include "lhe/tensor/packed.h"
#include "lhe/tensor/tensor.h"

namespace lhe::testing {

inline tensor::Tensor random_tensor(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::uint64_t seed,
                                    double bound = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  tensor::Tensor t(h, w, c);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

inline tensor::ConvWeights random_conv(std::uint32_t out, std::uint32_t in, std::uint32_t k, std::uint32_t stride,
                                       std::uint64_t seed, double bound = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  tensor::ConvWeights w;
  w.out_channels = out;
  w.in_channels = in;
  w.kernel_h = w.kernel_w = k;
  w.stride = stride;
  w.weights.resize(static_cast<std::size_t>(out) * in * k * k);
  for (auto& v : w.weights) v = dist(rng);
  w.bias.resize(out);
  for (auto& v : w.bias) v = dist(rng);
  return w;
}

inline tensor::LinearWeights random_linear(std::uint32_t out, std::uint32_t in, std::uint64_t seed, double bound = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  tensor::LinearWeights w;
  w.out_features = out;
  w.in_features = in;
  w.weights.resize(static_cast<std::size_t>(out) * in);
  for (auto& v : w.weights) v = dist(rng);
  w.bias.resize(out);
  for (auto& v : w.bias) v = dist(rng);
  return w;
}

inline tensor::SeWeights random_se(std::uint32_t channels, std::uint32_t ratio, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  tensor::SeWeights w;
  w.channels = channels;
  w.hidden = channels / ratio;
  w.fc1 = random_linear(w.hidden, channels, seed + 1);
  w.fc2 = random_linear(channels, w.hidden, seed + 2);
  w.act = tensor::ActivationCoeffs::polyact(0.1 + 0.1 * dist(rng), 1.0 + 0.2 * dist(rng), 0.1 * dist(rng));
  w.gate = tensor::ActivationCoeffs::approx_sigmoid(-0.004 + 0.002 * dist(rng), 0.01 * dist(rng),
                                                    0.2 + 0.05 * dist(rng), 0.5);
  return w;
}

inline double max_abs_diff(const tensor::Tensor& a, const tensor::Tensor& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels) return 1e300;
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Every rotation the operator tests use on maps up to `size` x `size`.
inline std::set<int> operator_steps(std::uint32_t size) {
  std::set<int> steps;
  for (std::uint32_t p = 1; p <= 4; p *= 2) {
    auto s = tensor::conv_rotation_steps(size, p, 3);
    steps.insert(s.begin(), s.end());
    auto pool = tensor::pool_rotation_steps(size, size, p, 0);
    steps.insert(pool.begin(), pool.end());
  }
  return steps;
}

}  // namespace lhe::testing
