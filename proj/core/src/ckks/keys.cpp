// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/keys.h"

#include "lhe/common/error.h"
#include "ring_util.h"

namespace lhe::ckks {

std::set<int> EvaluationKeys::rotation_steps() const {
  std::set<int> out;
  for (const auto& [step, key] : rotation_keys) out.insert(step);
  return out;
}

std::set<int> power_of_two_steps(std::uint32_t slot_count) {
  std::set<int> out;
  for (std::uint32_t s = 1; s < slot_count; s <<= 1) out.insert(static_cast<int>(s));
  return out;
}

KeySwitchKey make_switch_key(const CkksContext& ctx, const SecretKey& sk, const RnsPoly& target, Prng& prng) {
  const int top = ctx.max_level();
  const auto primes = detail::data_primes_with_special(ctx, top);
  const std::size_t limbs = primes.size();
  if (sk.s.limbs() != limbs || target.limbs() != limbs) throw KeyError("switch key: limb count mismatch");
  KeySwitchKey key;
  for (int j = 0; j <= top; ++j) {
    RnsPoly a = detail::sample_uniform(ctx, prng, primes);
    RnsPoly b = detail::lift_small(ctx, detail::sample_error(prng, ctx.n()), primes);
    for (std::size_t t = 0; t < limbs; ++t) {
      const Modulus& mod = ctx.modulus(primes[t]);
      const std::uint64_t q = mod.value();
      auto bl = b.limb(t);
      auto al = a.limb(t);
      auto sl = sk.s.limb(t);
      for (std::uint32_t i = 0; i < ctx.n(); ++i) bl[i] = sub_mod(bl[i], mul_mod(al[i], sl[i], mod), q);
      if (t == static_cast<std::size_t>(j)) {
        const std::uint64_t p = ctx.special_mod(j);
        auto tl = target.limb(t);
        for (std::uint32_t i = 0; i < ctx.n(); ++i) bl[i] = add_mod(bl[i], mul_mod(p, tl[i], mod), q);
      }
    }
    key.b.push_back(std::move(b));
    key.a.push_back(std::move(a));
  }
  return key;
}

KeySet keygen(const CkksContext& ctx, const std::set<int>& rotation_steps, const Seed& seed) {
  Prng prng(seed);
  const int top = ctx.max_level();
  const auto all = detail::data_primes_with_special(ctx, top);
  const auto data = detail::data_primes(top);

  KeySet ks;
  ks.secret_key.s = detail::lift_small(ctx, detail::sample_ternary(prng, ctx.n()), all);
  const RnsPoly& s = ks.secret_key.s;

  PublicKey pk;
  pk.a = detail::sample_uniform(ctx, prng, data);
  pk.b = detail::lift_small(ctx, detail::sample_error(prng, ctx.n()), data);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const Modulus& mod = ctx.modulus(t);
    auto bl = pk.b.limb(t);
    auto al = pk.a.limb(t);
    auto sl = s.limb(t);
    for (std::uint32_t i = 0; i < ctx.n(); ++i) bl[i] = sub_mod(bl[i], mul_mod(al[i], sl[i], mod), mod.value());
  }

  RnsPoly s2(ctx.n(), all.size());
  for (std::size_t t = 0; t < all.size(); ++t) {
    const Modulus& mod = ctx.modulus(all[t]);
    auto dst = s2.limb(t);
    auto sl = s.limb(t);
    for (std::uint32_t i = 0; i < ctx.n(); ++i) dst[i] = mul_mod(sl[i], sl[i], mod);
  }

  ks.eval.params = ctx.params();
  ks.eval.public_key = std::move(pk);
  ks.eval.relin_key = make_switch_key(ctx, ks.secret_key, s2, prng);
  for (int step : rotation_steps) {
    const int norm = ctx.normalize_step(step);
    if (norm == 0 || ks.eval.rotation_keys.contains(norm)) continue;
    const auto perm = ctx.galois_permutation(ctx.galois_element(norm));
    ks.eval.rotation_keys.emplace(norm, make_switch_key(ctx, ks.secret_key, detail::permute(s, perm), prng));
  }
  return ks;
}

KeySet keygen(const CkksParams& params, const std::set<int>& rotation_steps, const Seed& seed) {
  CkksContext ctx(params);
  return keygen(ctx, rotation_steps, seed);
}

}  // namespace lhe::ckks
