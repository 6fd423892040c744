// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/tensor/reference.h"

#include <bit>

#include "lhe/common/error.h"

namespace lhe::tensor::reference {

std::uint32_t conv_output_size(std::uint32_t size, std::uint32_t stride) { return (size + stride - 1) / stride; }

Tensor conv2d(const Tensor& x, const ConvWeights& w) {
  w.validate();
  if (x.channels != w.in_channels) throw ShapeError("conv2d: input channel count mismatch");
  const std::uint32_t s = w.stride;
  const int pad = static_cast<int>(w.kernel_h - 1) / 2;
  const std::uint32_t ho = conv_output_size(x.height, s), wo = conv_output_size(x.width, s);
  Tensor out(ho, wo, w.out_channels);
  for (std::uint32_t o = 0; o < w.out_channels; ++o) {
    for (std::uint32_t i = 0; i < ho; ++i) {
      for (std::uint32_t j = 0; j < wo; ++j) {
        double acc = 0.0;
        for (std::uint32_t c = 0; c < w.in_channels; ++c) {
          for (std::uint32_t ky = 0; ky < w.kernel_h; ++ky) {
            for (std::uint32_t kx = 0; kx < w.kernel_w; ++kx) {
              const int y = static_cast<int>(s * i + ky) - pad;
              const int z = static_cast<int>(s * j + kx) - pad;
              if (y < 0 || z < 0 || y >= static_cast<int>(x.height) || z >= static_cast<int>(x.width)) continue;
              const double wt = w.w(o, c, ky, kx);
              if (wt == 0.0) continue;
              acc += wt * x.at(static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(z), c);
            }
          }
        }
        out.at(i, j, o) = acc + w.bias[o];
      }
    }
  }
  return out;
}

Tensor activation(const Tensor& x, const ActivationCoeffs& k) {
  Tensor out = x;
  for (auto& v : out.data) v = k.eval(v);
  return out;
}

double tree_sum(const std::vector<double>& v) {
  std::vector<double> buf(std::bit_ceil(std::max<std::size_t>(v.size(), 1)), 0.0);
  std::copy(v.begin(), v.end(), buf.begin());
  for (std::size_t len = buf.size(); len > 1; len /= 2)
    for (std::size_t i = 0; i < len / 2; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
  return buf[0];
}

Tensor global_avg_pool(const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(static_cast<std::size_t>(x.height) * x.width);
  Tensor out(1, 1, x.channels);
  for (std::uint32_t c = 0; c < x.channels; ++c) out.at(0, 0, c) = tree_sum(x.channel(c)) * inv;
  return out;
}

Tensor se_block(const Tensor& x, const SeWeights& w) {
  w.validate();
  if (x.channels != w.channels) throw ShapeError("se_block: channel count mismatch");
  const std::size_t hw = static_cast<std::size_t>(x.height) * x.width;
  const double count = static_cast<double>(hw);
  std::vector<double> a(w.hidden);
  for (std::uint32_t j = 0; j < w.hidden; ++j) {
    std::vector<double> u(hw, 0.0);
    for (std::uint32_t c = 0; c < w.channels; ++c) {
      const double coeff = w.fc1.w(j, c) / count;
      if (coeff == 0.0) continue;
      const auto xc = x.channel(c);
      for (std::size_t i = 0; i < hw; ++i) u[i] += coeff * xc[i];
    }
    a[j] = w.act.eval(tree_sum(u) + w.fc1.bias[j]);
  }
  Tensor out = x;
  for (std::uint32_t c = 0; c < w.channels; ++c) {
    double v = 0.0;
    for (std::uint32_t j = 0; j < w.hidden; ++j) {
      const double coeff = w.fc2.w(c, j);
      if (coeff == 0.0) continue;
      v += coeff * a[j];
    }
    const double g = w.gate.eval(v + w.fc2.bias[c]);
    for (std::uint32_t h = 0; h < x.height; ++h)
      for (std::uint32_t z = 0; z < x.width; ++z) out.at(h, z, c) = x.at(h, z, c) * g;
  }
  return out;
}

Tensor residual_add(const Tensor& x, const Tensor& skip) {
  if (x.height != skip.height || x.width != skip.width || x.channels != skip.channels) {
    throw ShapeError("residual_add: geometry mismatch");
  }
  Tensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x.data[i] + skip.data[i];
  return out;
}

Tensor linear(const Tensor& x, const LinearWeights& w) {
  w.validate();
  if (x.height != 1 || x.width != 1 || x.channels != w.in_features) throw ShapeError("linear: expects a pooled 1x1xC input");
  Tensor out(1, w.out_features, 1);
  for (std::uint32_t k = 0; k < w.out_features; ++k) {
    double acc = x.at(0, 0, 0) * w.w(k, 0);
    for (std::uint32_t c = 1; c < w.in_features; ++c) acc += x.at(0, 0, c) * w.w(k, c);
    out.at(0, k, 0) = acc + w.bias[k];
  }
  return out;
}

}  // namespace lhe::tensor::reference
