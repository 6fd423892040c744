// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lhe::tensor {

// Dense H x W x C tensor, (h, w, c) row-major.
struct Tensor {
  std::uint32_t height = 0, width = 0, channels = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::uint32_t h, std::uint32_t w, std::uint32_t c, double fill = 0.0)
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t index(std::uint32_t h, std::uint32_t w, std::uint32_t c) const {
    return (static_cast<std::size_t>(h) * width + w) * channels + c;
  }
  double& at(std::uint32_t h, std::uint32_t w, std::uint32_t c) { return data[index(h, w, c)]; }
  double at(std::uint32_t h, std::uint32_t w, std::uint32_t c) const { return data[index(h, w, c)]; }

  // Channel c as an H*W row-major vector.
  std::vector<double> channel(std::uint32_t c) const;
  void set_channel(std::uint32_t c, std::span<const double> values);

  bool operator==(const Tensor&) const = default;
};

// LatentTensor file: "LTNT", u16 version, u32 H, W, C, then H*W*C float32
// little-endian values in (h, w, c) row-major order.
inline constexpr std::uint16_t kLatentFormatVersion = 1;

std::vector<std::uint8_t> encode_latent(const Tensor& t);
// Values are rounded to float32, so decode(encode(t)) is exact only for
// float32-representable input.
Tensor decode_latent(std::span<const std::uint8_t> bytes);
Tensor load_latent(const std::string& path);
void save_latent(const std::string& path, const Tensor& t);

}  // namespace lhe::tensor
