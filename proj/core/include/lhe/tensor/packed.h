// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "lhe/ckks/evaluator.h"
#include "lhe/tensor/layers.h"
#include "lhe/tensor/tensor.h"

namespace lhe::tensor {

using ckks::Ciphertext;
using ckks::Evaluator;

// Encrypted feature map: channel c is one ciphertext holding the H x W map
// row-major in slots [0, H*W). With stride_phase p only slots at row % p == 0
// and col % p == 0 are valid; every other slot is zero. A replicated tensor
// (global pooling output) is 1x1 and holds its value in slots [0, span).
struct PackedTensor {
  std::vector<Ciphertext> channels;
  std::uint32_t height = 0, width = 0;
  std::uint32_t stride_phase = 1;
  bool replicated = false;
  std::uint32_t span = 0;  // replicated tensors: slots holding the value

  std::uint32_t logical_height() const { return height / stride_phase; }
  std::uint32_t logical_width() const { return width / stride_phase; }
  int level() const { return channels.empty() ? 0 : channels.front().level; }
  double scale() const { return channels.empty() ? 0.0 : channels.front().scale; }
  // Throws ShapeError if channels disagree on level, scale or backend.
  void check_consistent() const;
};

// Level consumed by each operator.
inline constexpr int kConvCost = 1;
inline constexpr int kPolyactCost = 2;
inline constexpr int kApproxSigmoidCost = 3;
inline constexpr int kPoolCost = 1;
inline constexpr int kSeCost = 8;
inline constexpr int kResidualAddCost = 0;
inline constexpr int kLinearCost = 1;

// Scale at which conv weights are rounded to integers on the real backend.
inline constexpr double kConvWeightScale = 131072.0;  // 2^17

PackedTensor pack(const Tensor& t, const ckks::Encryptor& enc, Prng& prng);
// Returns the logical tensor: valid slots only (H/p x W/p x C), or 1x1xC
// read from slot 0 for replicated tensors.
Tensor unpack(const PackedTensor& x, const ckks::Decryptor& dec);

// 1 at valid slots of an H x W map with the given phase, 0 elsewhere.
std::vector<double> valid_mask(std::uint32_t height, std::uint32_t width, std::uint32_t phase, std::uint32_t slots);

PackedTensor conv2d(const Evaluator& ev, const PackedTensor& x, const ConvWeights& w);
PackedTensor polyact(const Evaluator& ev, const PackedTensor& x, const ActivationCoeffs& k);
// `target_scale` 0 means the default scale.
PackedTensor approx_sigmoid(const Evaluator& ev, const PackedTensor& x, const ActivationCoeffs& k,
                            double target_scale = 0);
// Mean of the valid slots, replicated over slots [0, span). span 0 means
// next_pow2(H*W).
PackedTensor global_avg_pool(const Evaluator& ev, const PackedTensor& x, std::uint32_t span = 0);
PackedTensor se_block(const Evaluator& ev, const PackedTensor& x, const SeWeights& w);
PackedTensor residual_add(const Evaluator& ev, const PackedTensor& x, const PackedTensor& skip);
// Needs a replicated input spanning at least out_features slots. Output is a
// 1 x K map in slots [0, K).
PackedTensor linear(const Evaluator& ev, const PackedTensor& x, const LinearWeights& w);

// Rotation steps each operator uses on an H x W map with the given phase.
std::set<int> conv_rotation_steps(std::uint32_t width, std::uint32_t phase, std::uint32_t kernel);
std::set<int> pool_rotation_steps(std::uint32_t height, std::uint32_t width, std::uint32_t phase, std::uint32_t span);
std::set<int> se_rotation_steps(std::uint32_t height, std::uint32_t width, std::uint32_t phase);

std::uint32_t default_pool_span(std::uint32_t height, std::uint32_t width);

}  // namespace lhe::tensor
