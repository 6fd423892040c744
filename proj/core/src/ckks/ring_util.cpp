// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "ring_util.h"

namespace lhe::ckks::detail {

RnsPoly lift_small(const CkksContext& ctx, std::span<const std::int64_t> coeffs, std::span<const std::size_t> primes) {
  RnsPoly out(ctx.n(), primes.size());
  for (std::size_t t = 0; t < primes.size(); ++t) {
    const std::uint64_t q = ctx.prime(primes[t]);
    auto limb = out.limb(t);
    for (std::uint32_t i = 0; i < ctx.n(); ++i) limb[i] = from_signed(coeffs[i], q);
    ctx.ntt(primes[t]).forward(limb);
  }
  return out;
}

std::vector<std::int64_t> sample_ternary(Prng& prng, std::uint32_t n) {
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = prng.ternary();
  return out;
}

std::vector<std::int64_t> sample_error(Prng& prng, std::uint32_t n) {
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = prng.centered_binomial(kErrorEta);
  return out;
}

RnsPoly sample_uniform(const CkksContext& ctx, Prng& prng, std::span<const std::size_t> primes) {
  RnsPoly out(ctx.n(), primes.size());
  for (std::size_t t = 0; t < primes.size(); ++t) {
    const std::uint64_t q = ctx.prime(primes[t]);
    for (auto& v : out.limb(t)) v = prng.uniform(q);
  }
  return out;
}

RnsPoly permute(const RnsPoly& in, std::span<const std::uint32_t> perm) {
  RnsPoly out(in.n(), in.limbs());
  for (std::size_t t = 0; t < in.limbs(); ++t) {
    auto src = in.limb(t);
    auto dst = out.limb(t);
    for (std::uint32_t j = 0; j < in.n(); ++j) dst[j] = src[perm[j]];
  }
  return out;
}

std::vector<std::size_t> data_primes(int level) {
  std::vector<std::size_t> out(static_cast<std::size_t>(level) + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::vector<std::size_t> data_primes_with_special(const CkksContext& ctx, int level) {
  auto out = data_primes(level);
  out.push_back(ctx.special_index());
  return out;
}

}  // namespace lhe::ckks::detail
