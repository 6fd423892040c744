// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lhe/ckks/context.h"
#include "lhe/ckks/rns_poly.h"
#include "lhe/common/prng.h"

namespace lhe::ckks::detail {

// Prime index backing limb t of a poly whose last limb may be the special
// prime. `limbs` counts all limbs; with `has_special` the last one maps to
// the special prime.
inline std::size_t prime_index(const CkksContext& ctx, std::size_t t, std::size_t limbs, bool has_special) {
  return (has_special && t + 1 == limbs) ? ctx.special_index() : t;
}

// Signed small polynomial lifted into NTT form over the listed primes.
RnsPoly lift_small(const CkksContext& ctx, std::span<const std::int64_t> coeffs, std::span<const std::size_t> primes);

std::vector<std::int64_t> sample_ternary(Prng& prng, std::uint32_t n);
std::vector<std::int64_t> sample_error(Prng& prng, std::uint32_t n);

// Uniform poly over the listed primes (already "NTT form": uniform either way).
RnsPoly sample_uniform(const CkksContext& ctx, Prng& prng, std::span<const std::size_t> primes);

// out[j] = in[perm[j]] on each limb.
RnsPoly permute(const RnsPoly& in, std::span<const std::uint32_t> perm);

std::vector<std::size_t> data_primes(int level);
std::vector<std::size_t> data_primes_with_special(const CkksContext& ctx, int level);

inline constexpr int kErrorEta = 21;

}  // namespace lhe::ckks::detail
