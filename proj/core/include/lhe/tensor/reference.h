// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lhe/tensor/layers.h"
#include "lhe/tensor/tensor.h"

// Plaintext operators on logical tensors. Summation orders mirror the packed
// operators so that the mock backend reproduces these results bit for bit.
namespace lhe::tensor::reference {

Tensor conv2d(const Tensor& x, const ConvWeights& w);
Tensor activation(const Tensor& x, const ActivationCoeffs& k);
// Pairwise tree sum over the row-major channel padded to a power of two,
// times 1/(H*W). Output is 1x1xC.
Tensor global_avg_pool(const Tensor& x);
Tensor se_block(const Tensor& x, const SeWeights& w);
Tensor residual_add(const Tensor& x, const Tensor& skip);
// Input must be 1x1xC; output is 1xKx1.
Tensor linear(const Tensor& x, const LinearWeights& w);

// Pairwise tree sum of v padded with zeros to the next power of two.
double tree_sum(const std::vector<double>& v);

std::uint32_t conv_output_size(std::uint32_t size, std::uint32_t stride);

}  // namespace lhe::tensor::reference
