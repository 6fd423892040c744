// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lhe/model/graph.h"

namespace lhe::model {

struct ResNetOptions {
  Geometry input{32, 32, 4};
  std::uint32_t num_classes = 14;
  std::array<std::uint32_t, 3> widths{16, 32, 64};
  std::uint32_t blocks_per_stage = 3;
  bool squeeze_excite = false;
  std::uint32_t se_ratio = 2;
  // Quadratic activation used after every conv/BN pair and after each residual
  // add. The identity path has no normalization, so x -> act(x) must stay
  // below its repelling fixed point (about 15.8 here) across all blocks.
  ActivationCoeffs act = ActivationCoeffs::polyact(0.03125, 0.5, 0.1);
  std::uint64_t seed = 1;
};

// ResNet20 over a latent grid: stem conv/BN/act, three stages of basic blocks
// (the first block of stages 2 and 3 downsamples with a 1x1 projection),
// global average pooling and a linear head. Weights are He-style random and
// batch-norm statistics are placeholders until calibrate_batchnorm runs.
// All values are float32-representable so bundles round-trip exactly.
ModelGraph build_resnet20_latent(const ResNetOptions& options);

// Sets every batch norm's running mean/variance from the plaintext forward
// pass over `samples`, in layer order.
void calibrate_batchnorm(ModelGraph& g, const std::vector<Tensor>& samples);

// Rounds every parameter to the nearest float32.
void round_to_float(ModelGraph& g);

}  // namespace lhe::model
