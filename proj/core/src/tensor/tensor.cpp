// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/tensor/tensor.h"

#include <cmath>

#include "lhe/common/bytes.h"
#include "lhe/common/error.h"

namespace lhe::tensor {

std::vector<double> Tensor::channel(std::uint32_t c) const {
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  for (std::uint32_t h = 0; h < height; ++h)
    for (std::uint32_t w = 0; w < width; ++w) out[static_cast<std::size_t>(h) * width + w] = at(h, w, c);
  return out;
}

void Tensor::set_channel(std::uint32_t c, std::span<const double> values) {
  if (values.size() < static_cast<std::size_t>(height) * width) throw ShapeError("set_channel: too few values");
  for (std::uint32_t h = 0; h < height; ++h)
    for (std::uint32_t w = 0; w < width; ++w) at(h, w, c) = values[static_cast<std::size_t>(h) * width + w];
}

std::vector<std::uint8_t> encode_latent(const Tensor& t) {
  if (t.data.size() != static_cast<std::size_t>(t.height) * t.width * t.channels) {
    throw ShapeError("latent data size does not match its dimensions");
  }
  ByteWriter w;
  w.magic("LTNT");
  w.u16(kLatentFormatVersion);
  w.u32(t.height);
  w.u32(t.width);
  w.u32(t.channels);
  for (double v : t.data) w.f32(static_cast<float>(v));
  return w.take();
}

Tensor decode_latent(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("LTNT");
  const std::uint16_t version = r.u16();
  if (version != kLatentFormatVersion) throw FormatError("unsupported latent format version " + std::to_string(version));
  const std::uint32_t h = r.u32(), w = r.u32(), c = r.u32();
  const std::uint64_t count = static_cast<std::uint64_t>(h) * w * c;
  if (count * 4 != r.remaining()) throw FormatError("latent payload size does not match its header");
  Tensor t(h, w, c);
  for (auto& v : t.data) {
    v = r.f32();
    if (!std::isfinite(v)) throw FormatError("latent contains a non-finite value");
  }
  return t;
}

Tensor load_latent(const std::string& path) { return decode_latent(read_file(path)); }

void save_latent(const std::string& path, const Tensor& t) { write_file(path, encode_latent(t)); }

}  // namespace lhe::tensor
