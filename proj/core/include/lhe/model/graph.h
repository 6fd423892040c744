// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lhe/ckks/params.h"
#include "lhe/tensor/layers.h"
#include "lhe/tensor/tensor.h"

namespace lhe::model {

using tensor::ActivationCoeffs;
using tensor::ConvWeights;
using tensor::LinearWeights;
using tensor::SeWeights;
using tensor::Tensor;

enum class LayerKind {
  kConv,
  kBatchNorm,
  kPolyact,
  kApproxSigmoid,
  kGlobalAvgPool,
  kLinear,
  kResidualBegin,
  kResidualEnd,
  kSe,
};

const char* kind_name(LayerKind kind);
LayerKind kind_from_name(const std::string& name);  // throws LoadError

struct BatchNormParams {
  std::vector<double> gamma, beta, mean, var;
  double eps = 1e-5;
  bool operator==(const BatchNormParams&) const = default;
};

// Projection on the skip path of a residual block (1x1 conv, optional BN).
struct Shortcut {
  ConvWeights conv;
  std::optional<BatchNormParams> bn;
  bool operator==(const Shortcut&) const = default;
};

// Only the payload matching `kind` is meaningful.
struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  std::string name;
  ConvWeights conv;
  BatchNormParams bn;
  ActivationCoeffs act;
  LinearWeights linear;
  SeWeights se;
  std::optional<Shortcut> shortcut;  // residual_end only
  bool operator==(const LayerSpec&) const = default;
};

struct Geometry {
  std::uint32_t height = 0, width = 0, channels = 0;
  bool operator==(const Geometry&) const = default;
};

struct ModelGraph {
  Geometry input;
  std::vector<LayerSpec> layers;
  std::uint32_t num_classes = 0;
  // Layer indices before which ciphertexts are refreshed (planner output).
  std::vector<std::size_t> refresh_points;

  // Shape-checks the whole chain; throws ShapeError naming the layer.
  void validate() const;
  bool operator==(const ModelGraph&) const = default;
};

// Shape of the activation after each layer, as seen by the packed operators.
struct LayerShape {
  std::uint32_t height = 0, width = 0, channels = 0;  // physical map
  std::uint32_t phase = 1;
  bool pooled = false;
};
// Entry i is the shape after layer i; validates along the way.
std::vector<LayerShape> infer_shapes(const ModelGraph& g);

// Rewrites conv weights with the following batch norm and drops BN layers
// (shortcut BN included). Throws FoldError on missing/misshaped statistics.
ModelGraph fold_batchnorm(const ModelGraph& g);

// Level consumed by one layer (residual markers cost 0; batch norm must be
// folded first and costs 0 here).
int layer_cost(const LayerSpec& layer);
// Cost of a planner item starting at `index`: a whole residual block is one
// item costing max(main path, shortcut). Sets `end` to one past the item.
int item_cost(const ModelGraph& g, std::size_t index, std::size_t& end);

// Greedy segmentation. Throws PlanError if one item exceeds the usable levels.
ModelGraph plan_levels(const ModelGraph& g, const ckks::CkksParams& params);

struct LevelStep {
  int before = 0, after = 0;
  bool operator==(const LevelStep&) const = default;
};
// Level before/after every layer under the graph's refresh points, starting
// from a fresh ciphertext.
std::vector<LevelStep> predict_levels(const ModelGraph& g, const ckks::CkksParams& params);

// Rotation steps the packed execution of `g` needs (slot_count normalizes).
std::set<int> required_rotation_steps(const ModelGraph& g, const ckks::CkksParams& params);
// Replicated span of the pooling output: enough slots for the linear head.
std::uint32_t pool_span(const ModelGraph& g);

// Observer sees every layer's output; `shortcut` is the projected skip
// (before its BN) at residual_end layers that have one.
using ForwardObserver = std::function<void(std::size_t layer, const Tensor& out, const Tensor* shortcut)>;

// Plaintext reference forward pass; returns the logits.
std::vector<double> plaintext_forward(const ModelGraph& g, const Tensor& latent, const ForwardObserver& observer = {});

}  // namespace lhe::model
