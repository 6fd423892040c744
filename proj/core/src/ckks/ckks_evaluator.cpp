// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "lhe/ckks/evaluator.h"
#include "lhe/common/error.h"
#include "ring_util.h"

namespace lhe::ckks {
namespace {

Ciphertext make_ct(std::uint32_t n, std::size_t limbs, std::size_t count = 2) {
  Ciphertext out;
  out.backend = Backend::kReal;
  for (std::size_t k = 0; k < count; ++k) out.polys.emplace_back(n, limbs);
  return out;
}

void check_shape(const CkksContext& ctx, const Ciphertext& a) {
  if (a.polys.size() != 2) throw ParamError("ciphertext must have two components");
  for (const auto& p : a.polys) {
    if (p.n() != ctx.n() || p.limbs() != static_cast<std::size_t>(a.level) + 1) {
      throw ParamError("ciphertext shape does not match the parameter set");
    }
  }
}

// Divides by the prime behind the last limb with rounding and drops that limb.
// `last_mod(i)` is that prime mod q_i and `inv(i)` its inverse mod q_i.
template <typename LastMod, typename Inv>
RnsPoly drop_last_limb(const CkksContext& ctx, const RnsPoly& in, std::size_t last_prime, LastMod last_mod, Inv inv) {
  const std::uint32_t n = ctx.n();
  const std::size_t keep = in.limbs() - 1;
  std::vector<std::uint64_t> top(in.limb(keep).begin(), in.limb(keep).end());
  ctx.ntt(last_prime).inverse(top);
  const std::uint64_t p = ctx.prime(last_prime);
  const std::uint64_t half = p >> 1;
  RnsPoly out(n, keep);
  std::vector<std::uint64_t> tmp(n);
  for (std::size_t i = 0; i < keep; ++i) {
    const Modulus& mod = ctx.modulus(i);
    const std::uint64_t q = mod.value();
    const std::uint64_t pm = last_mod(i);
    for (std::uint32_t k = 0; k < n; ++k) {
      std::uint64_t r = reduce_64(top[k], mod);
      tmp[k] = top[k] > half ? sub_mod(r, pm, q) : r;
    }
    ctx.ntt(i).forward(tmp);
    const std::uint64_t w = inv(i);
    const std::uint64_t ws = shoup_precompute(w, q);
    auto src = in.limb(i);
    auto dst = out.limb(i);
    for (std::uint32_t k = 0; k < n; ++k) dst[k] = mul_shoup(sub_mod(src[k], tmp[k], q), w, ws, q);
  }
  return out;
}

// Hybrid decomposition of d (level + 1 data limbs, NTT form): digit j is
// [d]_{q_j} lifted to all data primes up to `level` and the special prime.
std::vector<RnsPoly> decompose(const CkksContext& ctx, const RnsPoly& d, int level) {
  const std::uint32_t n = ctx.n();
  const auto primes = detail::data_primes_with_special(ctx, level);
  std::vector<RnsPoly> digits;
  digits.reserve(static_cast<std::size_t>(level) + 1);
  std::vector<std::uint64_t> coeff(n);
  for (int j = 0; j <= level; ++j) {
    std::copy(d.limb(j).begin(), d.limb(j).end(), coeff.begin());
    ctx.ntt(j).inverse(coeff);
    RnsPoly digit(n, primes.size());
    for (std::size_t t = 0; t < primes.size(); ++t) {
      auto dst = digit.limb(t);
      if (t == static_cast<std::size_t>(j)) {
        std::copy(d.limb(j).begin(), d.limb(j).end(), dst.begin());
        continue;
      }
      const Modulus& mod = ctx.modulus(primes[t]);
      if (ctx.prime(j) <= mod.value()) {
        std::copy(coeff.begin(), coeff.end(), dst.begin());
      } else {
        for (std::uint32_t k = 0; k < n; ++k) dst[k] = reduce_64(coeff[k], mod);
      }
      ctx.ntt(primes[t]).forward(dst);
    }
    digits.push_back(std::move(digit));
  }
  return digits;
}

// sum_j digit_j(perm) * key_j, then divided by the special prime.
// Returns the two components over data limbs 0..level.
std::pair<RnsPoly, RnsPoly> switch_inner(const CkksContext& ctx, const std::vector<RnsPoly>& digits,
                                         const KeySwitchKey& key, int level, const std::uint32_t* perm) {
  const std::uint32_t n = ctx.n();
  const auto primes = detail::data_primes_with_special(ctx, level);
  const std::size_t key_special_limb = static_cast<std::size_t>(ctx.max_level()) + 1;
  RnsPoly ext0(n, primes.size()), ext1(n, primes.size());
  std::vector<u128> acc0(n), acc1(n);
  for (std::size_t t = 0; t < primes.size(); ++t) {
    const Modulus& mod = ctx.modulus(primes[t]);
    const std::size_t kt = t + 1 == primes.size() ? key_special_limb : t;
    std::fill(acc0.begin(), acc0.end(), 0);
    std::fill(acc1.begin(), acc1.end(), 0);
    for (std::size_t j = 0; j < digits.size(); ++j) {
      auto dl = digits[j].limb(t);
      auto kb = key.b[j].limb(kt);
      auto ka = key.a[j].limb(kt);
      if (perm != nullptr) {
        for (std::uint32_t k = 0; k < n; ++k) {
          const std::uint64_t v = dl[perm[k]];
          acc0[k] += static_cast<u128>(v) * kb[k];
          acc1[k] += static_cast<u128>(v) * ka[k];
        }
      } else {
        for (std::uint32_t k = 0; k < n; ++k) {
          acc0[k] += static_cast<u128>(dl[k]) * kb[k];
          acc1[k] += static_cast<u128>(dl[k]) * ka[k];
        }
      }
    }
    auto o0 = ext0.limb(t);
    auto o1 = ext1.limb(t);
    for (std::uint32_t k = 0; k < n; ++k) {
      o0[k] = reduce_128(acc0[k], mod);
      o1[k] = reduce_128(acc1[k], mod);
    }
  }
  const std::size_t sp = ctx.special_index();
  auto pm = [&](std::size_t i) { return ctx.special_mod(i); };
  auto inv = [&](std::size_t i) { return ctx.inv_special_mod(i); };
  return {drop_last_limb(ctx, ext0, sp, pm, inv), drop_last_limb(ctx, ext1, sp, pm, inv)};
}

void add_into(const CkksContext& ctx, RnsPoly& dst, const RnsPoly& src) {
  for (std::size_t t = 0; t < dst.limbs(); ++t) {
    const std::uint64_t q = ctx.prime(t);
    auto d = dst.limb(t);
    auto s = src.limb(t);
    for (std::uint32_t k = 0; k < ctx.n(); ++k) d[k] = add_mod(d[k], s[k], q);
  }
}

class RealAccumulator final : public LinearAccumulator {
 public:
  RealAccumulator(std::shared_ptr<const CkksContext> ctx, int level, double ct_scale, double coeff_scale)
      : ctx_(std::move(ctx)), level_(level), ct_scale_(ct_scale), coeff_scale_(coeff_scale) {
    const std::size_t limbs = static_cast<std::size_t>(level) + 1;
    acc_.assign(2 * limbs * ctx_->n(), 0);
  }

  // Entries stay in [0, 2q): each Shoup product is below 2q and the sum is
  // folded back after every add.
  void add(const Ciphertext& ct, double coeff) override {
    if (ct.backend != Backend::kReal) throw ParamError("accumulator: backend mismatch");
    if (ct.level != level_ || !Evaluator::same_scale(ct.scale, ct_scale_)) {
      throw DepthError("accumulator: operand level/scale differs from accumulator");
    }
    check_shape(*ctx_, ct);
    const auto residues = ctx_->integer_residues(coeff, coeff_scale_, level_);
    if (std::all_of(residues.begin(), residues.end(), [](std::uint64_t r) { return r == 0; })) return;
    const std::uint32_t n = ctx_->n();
    const std::size_t limbs = residues.size();
    for (std::size_t t = 0; t < limbs; ++t) {
      const std::uint64_t q = ctx_->prime(t);
      const std::uint64_t two_q = 2 * q;
      const std::uint64_t r = residues[t];
      const std::uint64_t rs = shoup_precompute(r, q);
      for (std::size_t c = 0; c < 2; ++c) {
        std::uint64_t* acc = acc_.data() + (c * limbs + t) * n;
        const std::uint64_t* src = ct.polys[c].limb(t).data();
        for (std::uint32_t k = 0; k < n; ++k) {
          const std::uint64_t v = acc[k] + mul_shoup_lazy(src[k], r, rs, q);
          acc[k] = v >= two_q ? v - two_q : v;
        }
      }
    }
  }

  Ciphertext finish() override {
    const std::uint32_t n = ctx_->n();
    const std::size_t limbs = static_cast<std::size_t>(level_) + 1;
    Ciphertext out = make_ct(n, limbs);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t t = 0; t < limbs; ++t) {
        const std::uint64_t q = ctx_->prime(t);
        const std::uint64_t* acc = acc_.data() + (c * limbs + t) * n;
        auto dst = out.polys[c].limb(t);
        for (std::uint32_t k = 0; k < n; ++k) dst[k] = acc[k] >= q ? acc[k] - q : acc[k];
      }
    }
    out.level = level_;
    out.scale = ct_scale_ * coeff_scale_;
    return out;
  }

 private:
  std::shared_ptr<const CkksContext> ctx_;
  int level_;
  double ct_scale_, coeff_scale_;
  std::vector<std::uint64_t> acc_;
};

}  // namespace

CkksEvaluator::CkksEvaluator(std::shared_ptr<const CkksContext> ctx, std::shared_ptr<const EvaluationKeys> keys)
    : Evaluator(std::move(ctx)), keys_(std::move(keys)) {
  if (!keys_) throw KeyError("evaluator needs evaluation keys");
  if (!(keys_->params == context().params())) throw ParamError("evaluation keys were made for different parameters");
}

Plaintext CkksEvaluator::encode(std::span<const double> values, int level, double scale) const {
  Plaintext pt;
  pt.backend = Backend::kReal;
  pt.poly = context().encode(values, scale, level);
  pt.level = level;
  pt.scale = scale;
  return pt;
}

std::unique_ptr<LinearAccumulator> CkksEvaluator::make_accumulator(int level, double ct_scale,
                                                                   double coeff_scale) const {
  if (level < 0 || level > context().max_level()) throw DepthError("accumulator: level out of range");
  return std::make_unique<RealAccumulator>(context_ptr(), level, ct_scale, coeff_scale);
}

Ciphertext CkksEvaluator::add_raw(const Ciphertext& a, const Ciphertext& b, bool subtract) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  check_shape(ctx, b);
  Ciphertext out = make_ct(ctx.n(), a.polys[0].limbs());
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < a.polys[c].limbs(); ++t) {
      const std::uint64_t q = ctx.prime(t);
      auto x = a.polys[c].limb(t);
      auto y = b.polys[c].limb(t);
      auto z = out.polys[c].limb(t);
      if (subtract) {
        for (std::uint32_t k = 0; k < ctx.n(); ++k) z[k] = sub_mod(x[k], y[k], q);
      } else {
        for (std::uint32_t k = 0; k < ctx.n(); ++k) z[k] = add_mod(x[k], y[k], q);
      }
    }
  }
  return out;
}

Ciphertext CkksEvaluator::negate_raw(const Ciphertext& a) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  Ciphertext out = a;
  for (auto& p : out.polys) {
    for (std::size_t t = 0; t < p.limbs(); ++t) {
      const std::uint64_t q = ctx.prime(t);
      for (auto& v : p.limb(t)) v = neg_mod(v, q);
    }
  }
  return out;
}

Ciphertext CkksEvaluator::add_plain_raw(const Ciphertext& a, const Plaintext& pt) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  if (pt.backend != Backend::kReal || pt.poly.limbs() != a.polys[0].limbs()) {
    throw ParamError("plaintext does not match ciphertext");
  }
  Ciphertext out = a;
  add_into(ctx, out.polys[0], pt.poly);
  return out;
}

Ciphertext CkksEvaluator::mul_plain_raw(const Ciphertext& a, const Plaintext& pt) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  if (pt.backend != Backend::kReal || pt.poly.limbs() != a.polys[0].limbs()) {
    throw ParamError("plaintext does not match ciphertext");
  }
  Ciphertext out = a;
  for (auto& p : out.polys) {
    for (std::size_t t = 0; t < p.limbs(); ++t) {
      const Modulus& mod = ctx.modulus(t);
      auto x = p.limb(t);
      auto y = pt.poly.limb(t);
      for (std::uint32_t k = 0; k < ctx.n(); ++k) x[k] = mul_mod(x[k], y[k], mod);
    }
  }
  return out;
}

Ciphertext CkksEvaluator::mul_const_raw(const Ciphertext& a, double value, double coeff_scale) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  const auto residues = ctx.integer_residues(value, coeff_scale, a.level);
  Ciphertext out = a;
  for (auto& p : out.polys) {
    for (std::size_t t = 0; t < p.limbs(); ++t) {
      const std::uint64_t q = ctx.prime(t);
      const std::uint64_t w = residues[t];
      const std::uint64_t ws = shoup_precompute(w, q);
      for (auto& v : p.limb(t)) v = mul_shoup(v, w, ws, q);
    }
  }
  return out;
}

Ciphertext CkksEvaluator::mul_raw(const Ciphertext& a, const Ciphertext& b) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  check_shape(ctx, b);
  const std::uint32_t n = ctx.n();
  const std::size_t limbs = a.polys[0].limbs();
  RnsPoly d0(n, limbs), d1(n, limbs), d2(n, limbs);
  for (std::size_t t = 0; t < limbs; ++t) {
    const Modulus& mod = ctx.modulus(t);
    const std::uint64_t q = mod.value();
    auto a0 = a.polys[0].limb(t);
    auto a1 = a.polys[1].limb(t);
    auto b0 = b.polys[0].limb(t);
    auto b1 = b.polys[1].limb(t);
    auto e0 = d0.limb(t);
    auto e1 = d1.limb(t);
    auto e2 = d2.limb(t);
    for (std::uint32_t k = 0; k < n; ++k) {
      e0[k] = mul_mod(a0[k], b0[k], mod);
      e1[k] = reduce_128(static_cast<u128>(a0[k]) * b1[k] + static_cast<u128>(a1[k]) * b0[k], mod);
      e2[k] = mul_mod(a1[k], b1[k], mod);
    }
    (void)q;
  }
  const auto digits = decompose(ctx, d2, a.level);
  auto [k0, k1] = switch_inner(ctx, digits, keys_->relin_key, a.level, nullptr);
  add_into(ctx, d0, k0);
  add_into(ctx, d1, k1);
  Ciphertext out;
  out.backend = Backend::kReal;
  out.polys.push_back(std::move(d0));
  out.polys.push_back(std::move(d1));
  return out;
}

Ciphertext CkksEvaluator::rescale_raw(const Ciphertext& a) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  const std::size_t top = static_cast<std::size_t>(a.level);
  auto pm = [&](std::size_t i) { return ctx.prime(top) % ctx.prime(i); };
  auto inv = [&](std::size_t i) { return ctx.inv_prime_mod(top, i); };
  Ciphertext out;
  out.backend = Backend::kReal;
  for (const auto& p : a.polys) out.polys.push_back(drop_last_limb(ctx, p, top, pm, inv));
  return out;
}

Ciphertext CkksEvaluator::drop_raw(const Ciphertext& a, int level) const {
  check_shape(context(), a);
  Ciphertext out = a;
  for (auto& p : out.polys) p.truncate(static_cast<std::size_t>(level) + 1);
  return out;
}

std::vector<int> CkksEvaluator::compose_steps(int step) const {
  const int slots = static_cast<int>(context().slot_count());
  const int target = context().normalize_step(step);
  if (target == 0) return {};
  if (keys_->rotation_keys.contains(target)) return {target};
  // BFS over residues mod slots; edges are keyed steps.
  std::vector<int> prev(slots, -1), via(slots, 0);
  std::deque<int> queue{0};
  prev[0] = 0;
  while (!queue.empty() && prev[target] < 0) {
    const int cur = queue.front();
    queue.pop_front();
    for (const auto& [s, key] : keys_->rotation_keys) {
      const int next = (cur + s) % slots;
      if (prev[next] >= 0) continue;
      prev[next] = cur;
      via[next] = s;
      queue.push_back(next);
    }
  }
  if (prev[target] < 0) throw KeyError("no rotation key path for step " + std::to_string(step));
  std::vector<int> path;
  for (int cur = target; cur != 0; cur = prev[cur]) path.push_back(via[cur]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Ciphertext> CkksEvaluator::rotate_raw(const Ciphertext& a, std::span<const int> steps) const {
  const auto& ctx = context();
  check_shape(ctx, a);
  std::optional<std::vector<RnsPoly>> hoisted;
  auto single = [&](const Ciphertext& in, int s, const std::vector<RnsPoly>& digits) {
    const auto perm = ctx.galois_permutation(ctx.galois_element(s));
    auto [k0, k1] = switch_inner(ctx, digits, keys_->rotation_keys.at(s), in.level, perm.data());
    RnsPoly c0 = detail::permute(in.polys[0], perm);
    add_into(ctx, c0, k0);
    Ciphertext out;
    out.backend = Backend::kReal;
    out.level = in.level;
    out.polys.push_back(std::move(c0));
    out.polys.push_back(std::move(k1));
    return out;
  };
  std::vector<Ciphertext> out;
  out.reserve(steps.size());
  for (int s : steps) {
    if (s == 0) {
      out.push_back(a);
      continue;
    }
    if (keys_->rotation_keys.contains(s)) {
      if (!hoisted) hoisted = decompose(ctx, a.polys[1], a.level);
      out.push_back(single(a, s, *hoisted));
      continue;
    }
    Ciphertext cur = a;
    for (int part : compose_steps(s)) cur = single(cur, part, decompose(ctx, cur.polys[1], cur.level));
    out.push_back(std::move(cur));
  }
  return out;
}

}  // namespace lhe::ckks
