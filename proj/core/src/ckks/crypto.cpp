// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "lhe/ckks/evaluator.h"
#include "lhe/common/error.h"
#include "ring_util.h"

namespace lhe::ckks {

CkksEncryptor::CkksEncryptor(std::shared_ptr<const CkksContext> ctx, PublicKey pk)
    : ctx_(std::move(ctx)), pk_(std::move(pk)) {
  const auto limbs = static_cast<std::size_t>(ctx_->max_level()) + 1;
  if (pk_.b.n() != ctx_->n() || pk_.b.limbs() != limbs || pk_.a.limbs() != limbs) {
    throw KeyError("public key does not match the parameter set");
  }
}

Ciphertext CkksEncryptor::encrypt(std::span<const double> values, Prng& prng) const {
  const auto& ctx = *ctx_;
  const int level = ctx.max_level();
  const auto primes = detail::data_primes(level);
  RnsPoly m = ctx.encode(values, ctx.params().default_scale, level);
  RnsPoly v = detail::lift_small(ctx, detail::sample_ternary(prng, ctx.n()), primes);
  RnsPoly e0 = detail::lift_small(ctx, detail::sample_error(prng, ctx.n()), primes);
  RnsPoly e1 = detail::lift_small(ctx, detail::sample_error(prng, ctx.n()), primes);
  Ciphertext ct;
  ct.backend = Backend::kReal;
  ct.level = level;
  ct.scale = ctx.params().default_scale;
  for (std::size_t t = 0; t < primes.size(); ++t) {
    const Modulus& mod = ctx.modulus(t);
    const std::uint64_t q = mod.value();
    auto vl = v.limb(t);
    auto bl = pk_.b.limb(t);
    auto al = pk_.a.limb(t);
    auto c0 = e0.limb(t);
    auto c1 = e1.limb(t);
    auto ml = m.limb(t);
    for (std::uint32_t k = 0; k < ctx.n(); ++k) {
      c0[k] = add_mod(add_mod(mul_mod(vl[k], bl[k], mod), c0[k], q), ml[k], q);
      c1[k] = add_mod(mul_mod(vl[k], al[k], mod), c1[k], q);
    }
  }
  ct.polys.push_back(std::move(e0));
  ct.polys.push_back(std::move(e1));
  return ct;
}

CkksDecryptor::CkksDecryptor(std::shared_ptr<const CkksContext> ctx, SecretKey sk)
    : ctx_(std::move(ctx)), sk_(std::move(sk)) {
  if (sk_.s.n() != ctx_->n() || sk_.s.limbs() != static_cast<std::size_t>(ctx_->max_level()) + 2) {
    throw KeyError("secret key does not match the parameter set");
  }
}

SlotVector CkksDecryptor::decrypt(const Ciphertext& ct) const {
  const auto& ctx = *ctx_;
  if (ct.backend != Backend::kReal) throw ParamError("real decryptor given a mock ciphertext");
  if (ct.polys.size() != 2 || ct.level < 0 || ct.level > ctx.max_level()) throw ParamError("malformed ciphertext");
  for (const auto& p : ct.polys) {
    if (p.n() != ctx.n() || p.limbs() != static_cast<std::size_t>(ct.level) + 1) {
      throw ParamError("ciphertext shape does not match the parameter set");
    }
  }
  // Limb 0 alone suffices while |message coefficients| < q_0 / 2.
  const Modulus& mod = ctx.modulus(0);
  const std::uint64_t q = mod.value();
  std::vector<std::uint64_t> m(ctx.n());
  auto c0 = ct.polys[0].limb(0);
  auto c1 = ct.polys[1].limb(0);
  auto s = sk_.s.limb(0);
  for (std::uint32_t k = 0; k < ctx.n(); ++k) m[k] = add_mod(c0[k], mul_mod(c1[k], s[k], mod), q);
  ctx.ntt(0).inverse(m);
  std::vector<double> coeffs(ctx.n());
  for (std::uint32_t k = 0; k < ctx.n(); ++k) {
    coeffs[k] = m[k] > q / 2 ? -static_cast<double>(q - m[k]) : static_cast<double>(m[k]);
  }
  return ctx.decode(coeffs, ct.scale);
}

}  // namespace lhe::ckks
