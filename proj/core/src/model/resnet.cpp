// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/model/resnet.h"

#include <cmath>
#include <random>
#include <string>

#include "lhe/common/error.h"

namespace lhe::model {
namespace {

class Builder {
 public:
  explicit Builder(const ResNetOptions& o) : o_(o), rng_(o.seed) {}

  ConvWeights conv(std::uint32_t in, std::uint32_t out, std::uint32_t k, std::uint32_t stride) {
    ConvWeights w;
    w.in_channels = in;
    w.out_channels = out;
    w.kernel_h = w.kernel_w = k;
    w.stride = stride;
    const double sd = std::sqrt(2.0 / (in * k * k));
    std::normal_distribution<double> dist(0.0, sd);
    w.weights.resize(static_cast<std::size_t>(out) * in * k * k);
    for (auto& v : w.weights) v = dist(rng_);
    w.bias.assign(out, 0.0);
    return w;
  }

  BatchNormParams bn(std::uint32_t channels, double gamma_lo, double gamma_hi) {
    std::uniform_real_distribution<double> g(gamma_lo, gamma_hi);
    std::uniform_real_distribution<double> b(-0.1, 0.1);
    BatchNormParams p;
    for (std::uint32_t c = 0; c < channels; ++c) {
      p.gamma.push_back(g(rng_));
      p.beta.push_back(b(rng_));
    }
    p.mean.assign(channels, 0.0);
    p.var.assign(channels, 1.0);
    return p;
  }

  LinearWeights linear(std::uint32_t in, std::uint32_t out, double sd) {
    std::normal_distribution<double> dist(0.0, sd);
    LinearWeights w;
    w.in_features = in;
    w.out_features = out;
    w.weights.resize(static_cast<std::size_t>(out) * in);
    for (auto& v : w.weights) v = dist(rng_);
    w.bias.resize(out);
    for (auto& v : w.bias) v = 0.1 * dist(rng_);
    return w;
  }

  void add(LayerKind kind, std::string name) {
    LayerSpec l;
    l.kind = kind;
    l.name = std::move(name);
    g_.layers.push_back(std::move(l));
  }
  void add_conv(const std::string& name, ConvWeights w) {
    add(LayerKind::kConv, name);
    g_.layers.back().conv = std::move(w);
  }
  void add_bn(const std::string& name, BatchNormParams p) {
    add(LayerKind::kBatchNorm, name);
    g_.layers.back().bn = std::move(p);
  }
  void add_act(const std::string& name) {
    add(LayerKind::kPolyact, name);
    g_.layers.back().act = o_.act;
  }

  void block(const std::string& name, std::uint32_t in, std::uint32_t out, std::uint32_t stride) {
    add(LayerKind::kResidualBegin, name + ".begin");
    add_conv(name + ".conv1", conv(in, out, 3, stride));
    add_bn(name + ".bn1", bn(out, 0.8, 1.2));
    add_act(name + ".act1");
    add_conv(name + ".conv2", conv(out, out, 3, 1));
    add_bn(name + ".bn2", bn(out, 0.3, 0.5));
    if (o_.squeeze_excite) {
      add(LayerKind::kSe, name + ".se");
      auto& se = g_.layers.back().se;
      se.channels = out;
      se.hidden = out / o_.se_ratio;
      se.fc1 = linear(out, se.hidden, std::sqrt(1.0 / out));
      se.fc2 = linear(se.hidden, out, std::sqrt(1.0 / se.hidden));
      se.act = o_.act;
      se.gate = ActivationCoeffs::approx_sigmoid(-0.004, 0.0, 0.197, 0.5);
    }
    add(LayerKind::kResidualEnd, name + ".add");
    if (stride != 1 || in != out) {
      Shortcut sc;
      sc.conv = conv(in, out, 1, stride);
      sc.bn = bn(out, 0.3, 0.5);
      g_.layers.back().shortcut = std::move(sc);
    }
    add_act(name + ".act2");
  }

  ModelGraph build() {
    g_.input = o_.input;
    g_.num_classes = o_.num_classes;
    const auto& w = o_.widths;
    add_conv("stem.conv", conv(o_.input.channels, w[0], 3, 1));
    add_bn("stem.bn", bn(w[0], 0.8, 1.2));
    add_act("stem.act");
    std::uint32_t in = w[0];
    for (std::uint32_t s = 0; s < 3; ++s) {
      for (std::uint32_t b = 0; b < o_.blocks_per_stage; ++b) {
        const std::uint32_t stride = (s > 0 && b == 0) ? 2 : 1;
        block("stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1), in, w[s], stride);
        in = w[s];
      }
    }
    add(LayerKind::kGlobalAvgPool, "pool");
    add(LayerKind::kLinear, "fc");
    g_.layers.back().linear = linear(in, o_.num_classes, std::sqrt(1.0 / in));
    round_to_float(g_);
    g_.validate();
    return std::move(g_);
  }

 private:
  const ResNetOptions& o_;
  std::mt19937_64 rng_;
  ModelGraph g_;
};

void round_vec(std::vector<double>& v) {
  for (auto& x : v) x = static_cast<float>(x);
}
void round_bn(BatchNormParams& bn) {
  for (auto* v : {&bn.gamma, &bn.beta, &bn.mean, &bn.var}) round_vec(*v);
}
void round_act(ActivationCoeffs& a) {
  for (double* x : {&a.a, &a.b, &a.c, &a.alpha, &a.beta, &a.gamma, &a.d}) *x = static_cast<float>(*x);
}

void set_stats(BatchNormParams& bn, const Tensor& x, std::vector<double>& sum, std::vector<double>& sq,
               std::size_t& count) {
  (void)bn;
  for (std::uint32_t h = 0; h < x.height; ++h)
    for (std::uint32_t w = 0; w < x.width; ++w)
      for (std::uint32_t c = 0; c < x.channels; ++c) {
        const double v = x.at(h, w, c);
        sum[c] += v;
        sq[c] += v * v;
      }
  count += static_cast<std::size_t>(x.height) * x.width;
}

void finish_stats(BatchNormParams& bn, const std::vector<double>& sum, const std::vector<double>& sq,
                  std::size_t count) {
  for (std::size_t c = 0; c < sum.size(); ++c) {
    const double mean = sum[c] / static_cast<double>(count);
    bn.mean[c] = mean;
    bn.var[c] = std::max(sq[c] / static_cast<double>(count) - mean * mean, 1e-6);
  }
}

}  // namespace

ModelGraph build_resnet20_latent(const ResNetOptions& options) {
  if (options.se_ratio == 0) throw ShapeError("SE ratio must be positive");
  return Builder(options).build();
}

void round_to_float(ModelGraph& g) {
  for (auto& l : g.layers) {
    round_vec(l.conv.weights);
    round_vec(l.conv.bias);
    round_bn(l.bn);
    round_act(l.act);
    round_vec(l.linear.weights);
    round_vec(l.linear.bias);
    for (auto* fc : {&l.se.fc1, &l.se.fc2}) {
      round_vec(fc->weights);
      round_vec(fc->bias);
    }
    round_act(l.se.act);
    round_act(l.se.gate);
    if (l.shortcut) {
      round_vec(l.shortcut->conv.weights);
      round_vec(l.shortcut->conv.bias);
      if (l.shortcut->bn) round_bn(*l.shortcut->bn);
    }
  }
}

void calibrate_batchnorm(ModelGraph& g, const std::vector<Tensor>& samples) {
  if (samples.empty()) throw ShapeError("calibration needs at least one sample");
  // Statistics of layer i depend only on earlier layers, so one pass per
  // normalization layer in order gives the same result as training-mode BN.
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    auto& l = g.layers[i];
    const bool main_bn = l.kind == LayerKind::kBatchNorm;
    const bool skip_bn = l.kind == LayerKind::kResidualEnd && l.shortcut && l.shortcut->bn;
    if (!main_bn && !skip_bn) continue;
    BatchNormParams& bn = main_bn ? l.bn : *l.shortcut->bn;
    std::vector<double> sum(bn.gamma.size(), 0.0), sq(bn.gamma.size(), 0.0);
    std::size_t count = 0;
    for (const auto& x : samples) {
      plaintext_forward(g, x, [&](std::size_t layer, const Tensor& out, const Tensor* shortcut) {
        if (main_bn && layer + 1 == i) set_stats(bn, out, sum, sq, count);
        if (skip_bn && layer == i && shortcut) set_stats(bn, *shortcut, sum, sq, count);
      });
    }
    finish_stats(bn, sum, sq, count);
    round_bn(bn);
  }
}

}  // namespace lhe::model
