// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/model/graph.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "lhe/common/error.h"
#include "lhe/tensor/packed.h"
#include "lhe/tensor/reference.h"

namespace lhe::model {
namespace {

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::kConv, "conv"},
    {LayerKind::kBatchNorm, "batchnorm"},
    {LayerKind::kPolyact, "polyact"},
    {LayerKind::kApproxSigmoid, "approx_sigmoid"},
    {LayerKind::kGlobalAvgPool, "global_avg_pool"},
    {LayerKind::kLinear, "linear"},
    {LayerKind::kResidualBegin, "residual_begin"},
    {LayerKind::kResidualEnd, "residual_end"},
    {LayerKind::kSe, "se"},
};

std::string where(const LayerSpec& l) { return "layer '" + l.name + "' (" + kind_name(l.kind) + ")"; }

void check_bn(const BatchNormParams& bn, std::uint32_t channels, const std::string& who) {
  for (const auto* v : {&bn.gamma, &bn.beta, &bn.mean, &bn.var}) {
    if (v->size() != channels) throw ShapeError(who + ": batch-norm statistics do not match " + std::to_string(channels) + " channels");
  }
}

LayerShape conv_shape(LayerShape s, const ConvWeights& w, const std::string& who) {
  try {
    w.validate();
  } catch (const ShapeError& e) {
    throw ShapeError(who + ": " + e.what());
  }
  if (s.pooled) throw ShapeError(who + ": conv after global pooling");
  if (w.in_channels != s.channels) {
    throw ShapeError(who + ": expects " + std::to_string(w.in_channels) + " input channels, got " + std::to_string(s.channels));
  }
  const std::uint32_t p2 = s.phase * w.stride;
  if (s.height % p2 != 0 || s.width % p2 != 0) throw ShapeError(who + ": stride does not divide the map size");
  s.phase = p2;
  s.channels = w.out_channels;
  return s;
}

Tensor apply_bn(const Tensor& x, const BatchNormParams& bn) {
  Tensor out = x;
  for (std::uint32_t h = 0; h < x.height; ++h)
    for (std::uint32_t w = 0; w < x.width; ++w)
      for (std::uint32_t c = 0; c < x.channels; ++c) {
        const double k = bn.gamma[c] / std::sqrt(bn.var[c] + bn.eps);
        out.at(h, w, c) = (x.at(h, w, c) - bn.mean[c]) * k + bn.beta[c];
      }
  return out;
}

ConvWeights fold(const ConvWeights& conv, const BatchNormParams& bn, const std::string& who) {
  const std::uint32_t o_count = conv.out_channels;
  for (const auto* v : {&bn.gamma, &bn.beta, &bn.mean, &bn.var}) {
    if (v->size() != o_count) throw FoldError(who + ": batch-norm statistics missing or misshaped");
  }
  ConvWeights out = conv;
  if (out.bias.empty()) out.bias.assign(o_count, 0.0);
  const std::size_t per_out = static_cast<std::size_t>(conv.in_channels) * conv.kernel_h * conv.kernel_w;
  for (std::uint32_t o = 0; o < o_count; ++o) {
    if (!(bn.var[o] + bn.eps > 0)) throw FoldError(who + ": non-positive batch-norm variance");
    const double k = bn.gamma[o] / std::sqrt(bn.var[o] + bn.eps);
    for (std::size_t i = 0; i < per_out; ++i) out.weights[o * per_out + i] *= k;
    out.bias[o] = (out.bias[o] - bn.mean[o]) * k + bn.beta[o];
  }
  out.bn_folded = true;
  return out;
}

}  // namespace

const char* kind_name(LayerKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "unknown";
}

LayerKind kind_from_name(const std::string& name) {
  for (const auto& k : kKindNames)
    if (name == k.name) return k.kind;
  throw LoadError("unknown layer kind '" + name + "'");
}

std::vector<LayerShape> infer_shapes(const ModelGraph& g) {
  if (g.input.height == 0 || g.input.width == 0 || g.input.channels == 0) throw ShapeError("model input geometry is empty");
  if (g.layers.empty()) throw ShapeError("model has no layers");
  std::set<std::string> names;
  std::vector<LayerShape> out;
  LayerShape s{g.input.height, g.input.width, g.input.channels, 1, false};
  std::optional<LayerShape> skip;
  bool logits = false;
  for (const auto& l : g.layers) {
    const std::string who = where(l);
    if (l.name.empty()) throw ShapeError("layer with an empty name");
    if (!names.insert(l.name).second) throw ShapeError("duplicate layer name '" + l.name + "'");
    if (logits) throw ShapeError(who + ": layers after the final linear layer");
    switch (l.kind) {
      case LayerKind::kConv:
        s = conv_shape(s, l.conv, who);
        break;
      case LayerKind::kBatchNorm:
        check_bn(l.bn, s.channels, who);
        break;
      case LayerKind::kPolyact:
      case LayerKind::kApproxSigmoid: {
        const auto want = l.kind == LayerKind::kPolyact ? ActivationCoeffs::Kind::kPolyact
                                                        : ActivationCoeffs::Kind::kApproxSigmoid;
        if (l.act.kind != want) throw ShapeError(who + ": coefficient kind does not match the layer");
        l.act.validate();
        break;
      }
      case LayerKind::kGlobalAvgPool:
        if (s.pooled) throw ShapeError(who + ": input is already pooled");
        s = LayerShape{1, 1, s.channels, 1, true};
        break;
      case LayerKind::kLinear:
        try {
          l.linear.validate();
        } catch (const ShapeError& e) {
          throw ShapeError(who + ": " + e.what());
        }
        if (!s.pooled) throw ShapeError(who + ": linear needs a globally pooled input");
        if (l.linear.in_features != s.channels) throw ShapeError(who + ": input feature count mismatch");
        s = LayerShape{1, l.linear.out_features, 1, 1, false};
        logits = true;
        break;
      case LayerKind::kResidualBegin:
        if (skip) throw ShapeError(who + ": nested residual blocks are not supported");
        if (s.pooled) throw ShapeError(who + ": residual block after pooling");
        skip = s;
        break;
      case LayerKind::kResidualEnd: {
        if (!skip) throw ShapeError(who + ": residual_end without residual_begin");
        LayerShape k = *skip;
        skip.reset();
        if (l.shortcut) {
          k = conv_shape(k, l.shortcut->conv, who + " shortcut");
          if (l.shortcut->bn) check_bn(*l.shortcut->bn, k.channels, who + " shortcut");
        }
        if (k.height != s.height || k.width != s.width || k.channels != s.channels || k.phase != s.phase) {
          throw ShapeError(who + ": skip and main path shapes differ");
        }
        break;
      }
      case LayerKind::kSe:
        if (s.pooled) throw ShapeError(who + ": SE after pooling");
        try {
          l.se.validate();
        } catch (const ShapeError& e) {
          throw ShapeError(who + ": " + e.what());
        }
        if (l.se.channels != s.channels) throw ShapeError(who + ": channel count mismatch");
        break;
    }
    out.push_back(s);
  }
  if (skip) throw ShapeError("residual block is never closed");
  if (!logits) throw ShapeError("model must end with a linear layer");
  if (s.width != g.num_classes) {
    throw ShapeError("final linear layer has " + std::to_string(s.width) + " outputs, model declares " +
                     std::to_string(g.num_classes) + " classes");
  }
  return out;
}

void ModelGraph::validate() const { infer_shapes(*this); }

ModelGraph fold_batchnorm(const ModelGraph& g) {
  ModelGraph out = g;
  out.layers.clear();
  out.refresh_points.clear();
  for (const auto& l : g.layers) {
    if (l.kind == LayerKind::kBatchNorm) {
      if (out.layers.empty() || out.layers.back().kind != LayerKind::kConv) {
        throw FoldError(where(l) + " does not follow a conv");
      }
      auto& conv = out.layers.back();
      conv.conv = fold(conv.conv, l.bn, where(l));
      continue;
    }
    LayerSpec copy = l;
    if (copy.shortcut && copy.shortcut->bn) {
      copy.shortcut->conv = fold(copy.shortcut->conv, *copy.shortcut->bn, where(l) + " shortcut");
      copy.shortcut->bn.reset();
    }
    out.layers.push_back(std::move(copy));
  }
  return out;
}

int layer_cost(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::kConv:
      return tensor::kConvCost;
    case LayerKind::kPolyact:
      return tensor::kPolyactCost;
    case LayerKind::kApproxSigmoid:
      return tensor::kApproxSigmoidCost;
    case LayerKind::kGlobalAvgPool:
      return tensor::kPoolCost;
    case LayerKind::kLinear:
      return tensor::kLinearCost;
    case LayerKind::kSe:
      return tensor::kSeCost;
    case LayerKind::kBatchNorm:
    case LayerKind::kResidualBegin:
    case LayerKind::kResidualEnd:
      return 0;
  }
  return 0;
}

int item_cost(const ModelGraph& g, std::size_t index, std::size_t& end) {
  const auto& first = g.layers.at(index);
  if (first.kind != LayerKind::kResidualBegin) {
    end = index + 1;
    return layer_cost(first);
  }
  int main = 0;
  for (std::size_t j = index + 1; j < g.layers.size(); ++j) {
    if (g.layers[j].kind == LayerKind::kResidualEnd) {
      end = j + 1;
      const int skip = g.layers[j].shortcut ? tensor::kConvCost : 0;
      return std::max(main, skip);
    }
    main += layer_cost(g.layers[j]);
  }
  throw ShapeError("residual block is never closed");
}

ModelGraph plan_levels(const ModelGraph& g, const ckks::CkksParams& params) {
  g.validate();
  const int usable = params.usable_levels();
  ModelGraph out = g;
  out.refresh_points.clear();
  int used = 0;
  for (std::size_t i = 0, end = 0; i < g.layers.size(); i = end) {
    const int cost = item_cost(g, i, end);
    if (cost > usable) {
      throw PlanError(where(g.layers[i]) + " needs " + std::to_string(cost) + " levels but the modulus chain offers " +
                      std::to_string(usable) + "; deepen the chain");
    }
    if (used + cost > usable) {
      out.refresh_points.push_back(i);
      used = 0;
    }
    used += cost;
  }
  return out;
}

std::vector<LevelStep> predict_levels(const ModelGraph& g, const ckks::CkksParams& params) {
  const int top = params.max_level();
  const std::set<std::size_t> refresh(g.refresh_points.begin(), g.refresh_points.end());
  std::vector<LevelStep> out;
  int level = top;
  int skip_level = 0;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    if (refresh.contains(i)) level = top;
    const auto& l = g.layers[i];
    LevelStep step{level, level};
    if (l.kind == LayerKind::kResidualBegin) {
      skip_level = level;
    } else if (l.kind == LayerKind::kResidualEnd) {
      step.after = std::min(level, skip_level - (l.shortcut ? tensor::kConvCost : 0));
    } else {
      step.after = level - layer_cost(l);
    }
    level = step.after;
    out.push_back(step);
  }
  return out;
}

std::uint32_t pool_span(const ModelGraph& g) { return std::bit_ceil(std::max(g.num_classes, 1u)); }

std::set<int> required_rotation_steps(const ModelGraph& g, const ckks::CkksParams& params) {
  const auto shapes = infer_shapes(g);
  const int slots = static_cast<int>(params.slot_count());
  std::set<int> raw;
  LayerShape in{g.input.height, g.input.width, g.input.channels, 1, false};
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    std::set<int> s;
    if (l.kind == LayerKind::kConv) s = tensor::conv_rotation_steps(in.width, in.phase, l.conv.kernel_h);
    if (l.kind == LayerKind::kGlobalAvgPool) s = tensor::pool_rotation_steps(in.height, in.width, in.phase, pool_span(g));
    if (l.kind == LayerKind::kSe) s = tensor::se_rotation_steps(in.height, in.width, in.phase);
    raw.insert(s.begin(), s.end());
    in = shapes[i];
  }
  std::set<int> out;
  for (int s : raw) {
    const int n = ((s % slots) + slots) % slots;
    if (n != 0) out.insert(n);
  }
  return out;
}

std::vector<double> plaintext_forward(const ModelGraph& g, const Tensor& latent, const ForwardObserver& observer) {
  if (latent.height != g.input.height || latent.width != g.input.width || latent.channels != g.input.channels) {
    throw ShapeError("latent " + std::to_string(latent.height) + "x" + std::to_string(latent.width) + "x" +
                     std::to_string(latent.channels) + " does not match model input " + std::to_string(g.input.height) +
                     "x" + std::to_string(g.input.width) + "x" + std::to_string(g.input.channels));
  }
  g.validate();
  Tensor x = latent;
  std::optional<Tensor> skip;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    std::optional<Tensor> projected;
    switch (l.kind) {
      case LayerKind::kConv:
        x = tensor::reference::conv2d(x, l.conv);
        break;
      case LayerKind::kBatchNorm:
        x = apply_bn(x, l.bn);
        break;
      case LayerKind::kPolyact:
      case LayerKind::kApproxSigmoid:
        x = tensor::reference::activation(x, l.act);
        break;
      case LayerKind::kGlobalAvgPool:
        x = tensor::reference::global_avg_pool(x);
        break;
      case LayerKind::kLinear:
        x = tensor::reference::linear(x, l.linear);
        break;
      case LayerKind::kSe:
        x = tensor::reference::se_block(x, l.se);
        break;
      case LayerKind::kResidualBegin:
        skip = x;
        break;
      case LayerKind::kResidualEnd: {
        Tensor k = std::move(*skip);
        skip.reset();
        if (l.shortcut) {
          k = tensor::reference::conv2d(k, l.shortcut->conv);
          projected = k;
          if (l.shortcut->bn) k = apply_bn(k, *l.shortcut->bn);
        }
        x = tensor::reference::residual_add(x, k);
        break;
      }
    }
    if (observer) observer(i, x, projected ? &*projected : nullptr);
  }
  return x.data;
}

}  // namespace lhe::model
