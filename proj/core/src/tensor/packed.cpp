// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/tensor/packed.h"

#include <bit>
#include <string>

#include "lhe/common/error.h"

namespace lhe::tensor {
namespace {

void require_level(const PackedTensor& x, int cost, const char* op) {
  if (x.channels.empty()) throw ShapeError(std::string(op) + ": empty tensor");
  x.check_consistent();
  if (x.level() < cost) {
    throw DepthError(std::string(op) + ": needs " + std::to_string(cost) + " level(s), input has " +
                     std::to_string(x.level()));
  }
}

// Rounding drift from rescaling is below the scale tolerance; pin the scale
// to the intended value so later comparisons stay exact.
Ciphertext snap(Ciphertext ct, double scale) {
  if (Evaluator::same_scale(ct.scale, scale)) ct.scale = scale;
  return ct;
}

// Rotations that sum every valid slot of an H x W map into slot 0. For
// power-of-two maps this is a tree over the logical row-major values only.
std::vector<int> sum_steps(std::uint32_t height, std::uint32_t width, std::uint32_t phase) {
  std::vector<int> steps;
  if (std::has_single_bit(height) && std::has_single_bit(width)) {
    for (std::uint32_t s = 1; s < width / phase; s <<= 1) steps.push_back(static_cast<int>(phase * s));
    for (std::uint32_t s = 1; s < height / phase; s <<= 1) steps.push_back(static_cast<int>(phase * width * s));
  } else {
    for (std::uint32_t s = 1; s < default_pool_span(height, width); s <<= 1) steps.push_back(static_cast<int>(s));
  }
  return steps;
}

Ciphertext tree_sum(const Evaluator& ev, Ciphertext ct, const std::vector<int>& steps) {
  for (int step : steps) ct = ev.add(ct, ev.rotate(ct, step));
  return ct;
}

// Copies slot 0 into slots [0, span), assuming every other slot is zero.
Ciphertext replicate(const Evaluator& ev, Ciphertext ct, std::uint32_t span) {
  for (std::uint32_t step = 1; step < span; step <<= 1) ct = ev.add(ct, ev.rotate(ct, -static_cast<int>(step)));
  return ct;
}

std::vector<double> unit_at_zero(std::uint32_t slots, double value) {
  std::vector<double> v(slots, 0.0);
  v[0] = value;
  return v;
}

Ciphertext add_constant_valid(const Evaluator& ev, const PackedTensor& x, const Ciphertext& ct, double c) {
  if (x.replicated) return ev.add_constant(ct, c);
  auto mask = valid_mask(x.height, x.width, x.stride_phase, ev.context().slot_count());
  for (auto& m : mask) m *= c;
  return ev.add_plain(ct, mask);
}

PackedTensor like(const PackedTensor& x) {
  PackedTensor out;
  out.height = x.height;
  out.width = x.width;
  out.stride_phase = x.stride_phase;
  out.replicated = x.replicated;
  out.span = x.span;
  return out;
}

}  // namespace

void PackedTensor::check_consistent() const {
  for (const auto& ct : channels) {
    if (ct.level != channels.front().level || ct.backend != channels.front().backend ||
        !Evaluator::same_scale(ct.scale, channels.front().scale)) {
      throw ShapeError("packed tensor channels disagree on level, scale or backend");
    }
  }
}

std::vector<double> valid_mask(std::uint32_t height, std::uint32_t width, std::uint32_t phase, std::uint32_t slots) {
  if (static_cast<std::uint64_t>(height) * width > slots) throw CapacityError("feature map larger than slot_count");
  std::vector<double> mask(slots, 0.0);
  for (std::uint32_t r = 0; r < height; r += phase)
    for (std::uint32_t c = 0; c < width; c += phase) mask[static_cast<std::size_t>(r) * width + c] = 1.0;
  return mask;
}

std::uint32_t default_pool_span(std::uint32_t height, std::uint32_t width) {
  return std::bit_ceil(std::max<std::uint32_t>(height * width, 1));
}

PackedTensor pack(const Tensor& t, const ckks::Encryptor& enc, Prng& prng) {
  const std::uint32_t slots = enc.context().slot_count();
  if (static_cast<std::uint64_t>(t.height) * t.width > slots) {
    throw CapacityError("feature map " + std::to_string(t.height) + "x" + std::to_string(t.width) +
                        " exceeds slot_count " + std::to_string(slots));
  }
  PackedTensor out;
  out.height = t.height;
  out.width = t.width;
  for (std::uint32_t c = 0; c < t.channels; ++c) out.channels.push_back(enc.encrypt(t.channel(c), prng));
  return out;
}

Tensor unpack(const PackedTensor& x, const ckks::Decryptor& dec) {
  const auto channels = static_cast<std::uint32_t>(x.channels.size());
  if (x.replicated) {
    Tensor out(1, 1, channels);
    for (std::uint32_t c = 0; c < channels; ++c) out.at(0, 0, c) = dec.decrypt(x.channels[c])[0];
    return out;
  }
  const std::uint32_t p = x.stride_phase;
  Tensor out(x.logical_height(), x.logical_width(), channels);
  for (std::uint32_t c = 0; c < channels; ++c) {
    const auto slots = dec.decrypt(x.channels[c]);
    for (std::uint32_t i = 0; i < out.height; ++i)
      for (std::uint32_t j = 0; j < out.width; ++j)
        out.at(i, j, c) = slots[static_cast<std::size_t>(p * i) * x.width + p * j];
  }
  return out;
}

std::set<int> conv_rotation_steps(std::uint32_t width, std::uint32_t phase, std::uint32_t kernel) {
  std::set<int> steps;
  const int pad = static_cast<int>(kernel - 1) / 2;
  for (int dy = -pad; dy <= pad; ++dy)
    for (int dx = -pad; dx <= pad; ++dx) {
      const int s = static_cast<int>(phase) * (dy * static_cast<int>(width) + dx);
      if (s != 0) steps.insert(s);
    }
  return steps;
}

std::set<int> pool_rotation_steps(std::uint32_t height, std::uint32_t width, std::uint32_t phase, std::uint32_t span) {
  const auto sum = sum_steps(height, width, phase);
  std::set<int> steps(sum.begin(), sum.end());
  if (span == 0) span = default_pool_span(height, width);
  for (std::uint32_t s = 1; s < span; s <<= 1) steps.insert(-static_cast<int>(s));
  return steps;
}

std::set<int> se_rotation_steps(std::uint32_t height, std::uint32_t width, std::uint32_t phase) {
  return pool_rotation_steps(height, width, phase, default_pool_span(height, width));
}

PackedTensor conv2d(const Evaluator& ev, const PackedTensor& x, const ConvWeights& w) {
  require_level(x, kConvCost, "conv2d");
  w.validate();
  if (x.replicated) throw ShapeError("conv2d: input is a pooled tensor");
  if (x.channels.size() != w.in_channels) throw ShapeError("conv2d: input channel count mismatch");
  const std::uint32_t p = x.stride_phase, p2 = p * w.stride;
  const std::uint32_t H = x.height, W = x.width;
  if (H % p2 != 0 || W % p2 != 0) throw ShapeError("conv2d: strided map size must stay divisible by the phase");
  const auto& ctx = ev.context();
  const std::uint32_t slots = ctx.slot_count();
  const int pad = static_cast<int>(w.kernel_h - 1) / 2;
  const int level = x.level();
  const double s_x = x.scale();
  const double delta = ev.default_scale();
  const double w_scale = kConvWeightScale;
  const double m_scale = delta * static_cast<double>(ctx.prime(level)) / (s_x * w_scale);

  std::vector<int> steps;
  std::vector<ckks::Plaintext> masks;
  for (std::uint32_t ky = 0; ky < w.kernel_h; ++ky) {
    for (std::uint32_t kx = 0; kx < w.kernel_w; ++kx) {
      const int dy = static_cast<int>(ky) - pad, dx = static_cast<int>(kx) - pad;
      steps.push_back(static_cast<int>(p) * (dy * static_cast<int>(W) + dx));
      std::vector<double> mask(slots, 0.0);
      for (std::uint32_t r = 0; r < H; r += p2) {
        const int sr = static_cast<int>(r) + static_cast<int>(p) * dy;
        if (sr < 0 || sr >= static_cast<int>(H)) continue;
        for (std::uint32_t c = 0; c < W; c += p2) {
          const int sc = static_cast<int>(c) + static_cast<int>(p) * dx;
          if (sc < 0 || sc >= static_cast<int>(W)) continue;
          mask[static_cast<std::size_t>(r) * W + c] = 1.0;
        }
      }
      masks.push_back(ev.encode(mask, level, m_scale));
    }
  }

  std::vector<std::unique_ptr<ckks::LinearAccumulator>> accs;
  for (std::uint32_t o = 0; o < w.out_channels; ++o) accs.push_back(ev.make_accumulator(level, s_x * m_scale, w_scale));
  for (std::uint32_t c = 0; c < w.in_channels; ++c) {
    const auto rotated = ev.rotate_many(x.channels[c], steps);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::uint32_t ky = static_cast<std::uint32_t>(k) / w.kernel_w, kx = static_cast<std::uint32_t>(k) % w.kernel_w;
      bool used = false;
      for (std::uint32_t o = 0; o < w.out_channels && !used; ++o) used = w.w(o, c, ky, kx) != 0.0;
      if (!used) continue;
      const auto term = ev.multiply_plain_raw(rotated[k], masks[k]);
      for (std::uint32_t o = 0; o < w.out_channels; ++o) {
        const double wt = w.w(o, c, ky, kx);
        if (wt != 0.0) accs[o]->add(term, wt);
      }
    }
  }

  PackedTensor out;
  out.height = H;
  out.width = W;
  out.stride_phase = p2;
  const auto out_mask = valid_mask(H, W, p2, slots);
  for (std::uint32_t o = 0; o < w.out_channels; ++o) {
    auto ct = snap(ev.rescale(accs[o]->finish()), delta);
    std::vector<double> bias(slots);
    for (std::uint32_t i = 0; i < slots; ++i) bias[i] = out_mask[i] * w.bias[o];
    out.channels.push_back(ev.add_plain(ct, bias));
  }
  return out;
}

PackedTensor polyact(const Evaluator& ev, const PackedTensor& x, const ActivationCoeffs& k) {
  require_level(x, kPolyactCost, "polyact");
  if (k.kind != ActivationCoeffs::Kind::kPolyact) throw ShapeError("polyact: wrong coefficient kind");
  k.validate();
  const double delta = ev.default_scale();
  PackedTensor out = like(x);
  for (const auto& ct : x.channels) {
    const auto t = ev.multiply_scalar(ev.square(ct), k.a, delta);
    const auto u = ev.mod_switch_to(ev.multiply_scalar(ct, k.b, delta), t.level);
    out.channels.push_back(add_constant_valid(ev, x, ev.add(t, u), k.c));
  }
  return out;
}

PackedTensor approx_sigmoid(const Evaluator& ev, const PackedTensor& x, const ActivationCoeffs& k,
                            double target_scale) {
  require_level(x, kApproxSigmoidCost, "approx_sigmoid");
  if (k.kind != ActivationCoeffs::Kind::kApproxSigmoid) throw ShapeError("approx_sigmoid: wrong coefficient kind");
  k.validate();
  const double target = target_scale > 0 ? target_scale : ev.default_scale();
  PackedTensor out = like(x);
  for (const auto& ct : x.channels) {
    const auto x2 = ev.square(ct);
    const auto x3 = ev.multiply(x2, ct);
    const auto t3 = ev.multiply_scalar(x3, k.alpha, target);
    const auto t2 = ev.mod_switch_to(ev.multiply_scalar(x2, k.beta, target), t3.level);
    const auto t1 = ev.mod_switch_to(ev.multiply_scalar(ct, k.gamma, target), t3.level);
    out.channels.push_back(add_constant_valid(ev, x, ev.add(ev.add(t3, t2), t1), k.d));
  }
  return out;
}

PackedTensor global_avg_pool(const Evaluator& ev, const PackedTensor& x, std::uint32_t span) {
  require_level(x, kPoolCost, "global_avg_pool");
  if (x.replicated) throw ShapeError("global_avg_pool: input is already pooled");
  const std::uint32_t slots = ev.context().slot_count();
  const std::uint32_t n = default_pool_span(x.height, x.width);
  if (span == 0) span = n;
  if (span > slots || !std::has_single_bit(span)) throw ShapeError("global_avg_pool: span must be a power of two within slot_count");
  const double count = static_cast<double>(x.logical_height()) * x.logical_width();
  const auto inv = unit_at_zero(slots, 1.0 / count);
  const auto steps = sum_steps(x.height, x.width, x.stride_phase);
  PackedTensor out;
  out.height = out.width = 1;
  out.replicated = true;
  out.span = span;
  for (const auto& ct : x.channels) {
    auto m = snap(ev.multiply_plain(tree_sum(ev, ct, steps), inv, ev.default_scale()), ev.default_scale());
    out.channels.push_back(replicate(ev, m, span));
  }
  return out;
}

PackedTensor se_block(const Evaluator& ev, const PackedTensor& x, const SeWeights& w) {
  require_level(x, kSeCost, "se_block");
  w.validate();
  if (x.replicated) throw ShapeError("se_block: input is a pooled tensor");
  if (x.channels.size() != w.channels) throw ShapeError("se_block: channel count mismatch");
  const auto& ctx = ev.context();
  const std::uint32_t slots = ctx.slot_count();
  const int level = x.level();
  const double s_x = x.scale();
  const double delta = ev.default_scale();
  const std::uint32_t n = default_pool_span(x.height, x.width);
  const double count = static_cast<double>(x.logical_height()) * x.logical_width();

  // Squeeze folded into fc1: u_j = sum_c (fc1[j][c] / count) x_c, then summed over slots.
  PackedTensor squeezed;
  squeezed.height = squeezed.width = 1;
  const double u_scale = delta * static_cast<double>(ctx.prime(level)) / s_x;
  for (std::uint32_t j = 0; j < w.hidden; ++j) {
    auto acc = ev.make_accumulator(level, s_x, u_scale);
    for (std::uint32_t c = 0; c < w.channels; ++c) {
      const double coeff = w.fc1.w(j, c) / count;
      if (coeff != 0.0) acc->add(x.channels[c], coeff);
    }
    auto u = tree_sum(ev, snap(ev.rescale(acc->finish()), delta), sum_steps(x.height, x.width, x.stride_phase));
    squeezed.channels.push_back(ev.add_plain(u, unit_at_zero(slots, w.fc1.bias[j])));
  }
  const PackedTensor act = polyact(ev, squeezed, w.act);

  // Excite: mask each hidden unit to slot 0, mix with fc2, replicate.
  const int a_level = act.level();
  const double a_scale = act.scale();
  const double w_scale = kConvWeightScale;
  const double m_scale = delta * static_cast<double>(ctx.prime(a_level)) / (a_scale * w_scale);
  const auto e0 = ev.encode(unit_at_zero(slots, 1.0), a_level, m_scale);
  std::vector<Ciphertext> masked;
  for (const auto& a : act.channels) masked.push_back(ev.multiply_plain_raw(a, e0));
  PackedTensor excited;
  excited.height = excited.width = 1;
  excited.replicated = true;
  excited.span = n;
  for (std::uint32_t c = 0; c < w.channels; ++c) {
    auto acc = ev.make_accumulator(a_level, a_scale * m_scale, w_scale);
    for (std::uint32_t j = 0; j < w.hidden; ++j) {
      const double coeff = w.fc2.w(c, j);
      if (coeff != 0.0) acc->add(masked[j], coeff);
    }
    auto v = ev.add_plain(snap(ev.rescale(acc->finish()), delta), unit_at_zero(slots, w.fc2.bias[c]));
    excited.channels.push_back(replicate(ev, v, n));
  }

  // The gate lands at level - 7; choosing that prime as its scale makes the
  // final product come back at the input scale.
  const int gate_level = level - 7;
  const PackedTensor gate = approx_sigmoid(ev, excited, w.gate, static_cast<double>(ctx.prime(gate_level)));
  PackedTensor out = like(x);
  for (std::uint32_t c = 0; c < w.channels; ++c) {
    out.channels.push_back(snap(ev.multiply(x.channels[c], gate.channels[c]), s_x));
  }
  return out;
}

PackedTensor residual_add(const Evaluator& ev, const PackedTensor& x, const PackedTensor& skip) {
  if (x.height != skip.height || x.width != skip.width || x.stride_phase != skip.stride_phase ||
      x.replicated != skip.replicated || x.channels.size() != skip.channels.size()) {
    throw ShapeError("residual_add: geometry mismatch");
  }
  PackedTensor out = like(x);
  for (std::size_t c = 0; c < x.channels.size(); ++c) out.channels.push_back(ev.add(x.channels[c], skip.channels[c]));
  return out;
}

PackedTensor linear(const Evaluator& ev, const PackedTensor& x, const LinearWeights& w) {
  require_level(x, kLinearCost, "linear");
  w.validate();
  if (!x.replicated) throw ShapeError("linear: input must be globally pooled");
  if (x.channels.size() != w.in_features) throw ShapeError("linear: input feature count mismatch");
  const std::uint32_t slots = ev.context().slot_count();
  if (w.out_features > slots || x.span < w.out_features) throw ShapeError("linear: pooled span smaller than out_features");
  const int level = x.level();
  const double delta = ev.default_scale();
  const double pt_scale = delta * static_cast<double>(ev.context().prime(level)) / x.scale();
  Ciphertext acc;
  for (std::uint32_t c = 0; c < w.in_features; ++c) {
    std::vector<double> col(w.out_features);
    for (std::uint32_t k = 0; k < w.out_features; ++k) col[k] = w.w(k, c);
    auto term = ev.multiply_plain_raw(x.channels[c], ev.encode(col, level, pt_scale));
    acc = c == 0 ? term : ev.add(acc, term);
  }
  auto out_ct = snap(ev.rescale(acc), delta);
  PackedTensor out;
  out.height = 1;
  out.width = w.out_features;
  out.channels.push_back(ev.add_plain(out_ct, w.bias));
  return out;
}

}  // namespace lhe::tensor
