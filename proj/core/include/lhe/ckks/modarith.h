// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace lhe::ckks {

using u128 = unsigned __int128;

// A word-sized prime modulus (< 2^61) with its Barrett constant
// floor(2^128 / q), split into two words.
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(std::uint64_t q);

  std::uint64_t value() const { return q_; }
  std::uint64_t ratio_lo() const { return ratio_[0]; }
  std::uint64_t ratio_hi() const { return ratio_[1]; }

 private:
  std::uint64_t q_ = 0;
  std::uint64_t ratio_[2] = {0, 0};
};

// Reduces a 128-bit value modulo q.
inline std::uint64_t reduce_128(u128 x, const Modulus& m) {
  const std::uint64_t lo = static_cast<std::uint64_t>(x);
  const std::uint64_t hi = static_cast<std::uint64_t>(x >> 64);
  // floor(x * ratio / 2^128), up to a small additive error.
  u128 t0 = static_cast<u128>(lo) * m.ratio_lo();
  u128 t1 = static_cast<u128>(lo) * m.ratio_hi() + static_cast<std::uint64_t>(t0 >> 64);
  u128 t2 = static_cast<u128>(hi) * m.ratio_lo() + static_cast<std::uint64_t>(t1);
  std::uint64_t quot = hi * m.ratio_hi() + static_cast<std::uint64_t>(t1 >> 64) + static_cast<std::uint64_t>(t2 >> 64);
  std::uint64_t r = lo - quot * m.value();
  const std::uint64_t q = m.value();
  while (r >= q) r -= q;
  return r;
}

inline std::uint64_t reduce_64(std::uint64_t x, const Modulus& m) { return reduce_128(x, m); }

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, const Modulus& m) {
  return reduce_128(static_cast<u128>(a) * b, m);
}

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  std::uint64_t s = a + b;
  return s >= q ? s - q : s;
}

inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return a >= b ? a - b : a + q - b;
}

inline std::uint64_t neg_mod(std::uint64_t a, std::uint64_t q) { return a == 0 ? 0 : q - a; }

// Shoup precomputation floor(w * 2^64 / q) for multiplying many values by a
// fixed w.
inline std::uint64_t shoup_precompute(std::uint64_t w, std::uint64_t q) {
  return static_cast<std::uint64_t>((static_cast<u128>(w) << 64) / q);
}

// Returns w * x mod q in [0, 2q).
inline std::uint64_t mul_shoup_lazy(std::uint64_t x, std::uint64_t w, std::uint64_t w_shoup, std::uint64_t q) {
  std::uint64_t hi = static_cast<std::uint64_t>((static_cast<u128>(x) * w_shoup) >> 64);
  return w * x - hi * q;
}

inline std::uint64_t mul_shoup(std::uint64_t x, std::uint64_t w, std::uint64_t w_shoup, std::uint64_t q) {
  std::uint64_t r = mul_shoup_lazy(x, w, w_shoup, q);
  return r >= q ? r - q : r;
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, const Modulus& m);
std::uint64_t inv_mod(std::uint64_t a, const Modulus& m);  // q prime
bool is_prime(std::uint64_t n);

// Maps a signed integer to its residue in [0, q).
inline std::uint64_t from_signed(std::int64_t v, std::uint64_t q) {
  if (v >= 0) return static_cast<std::uint64_t>(v) % q;
  std::uint64_t r = static_cast<std::uint64_t>(-(v + 1)) % q;  // avoids overflow at INT64_MIN
  return q - 1 - r;
}

}  // namespace lhe::ckks
