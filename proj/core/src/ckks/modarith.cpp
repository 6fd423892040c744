// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/modarith.h"

#include <stdexcept>

namespace lhe::ckks {

Modulus::Modulus(std::uint64_t q) : q_(q) {
  if (q < 2 || q >= (std::uint64_t{1} << 61)) throw std::invalid_argument("modulus out of range");
  // floor((2^128 - 1) / q) equals floor(2^128 / q) for q not a power of two.
  u128 all_ones = ~static_cast<u128>(0);
  u128 ratio = all_ones / q;
  ratio_[0] = static_cast<std::uint64_t>(ratio);
  ratio_[1] = static_cast<std::uint64_t>(ratio >> 64);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, const Modulus& m) {
  std::uint64_t result = 1 % m.value();
  base = reduce_64(base, m);
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t inv_mod(std::uint64_t a, const Modulus& m) {
  if (a % m.value() == 0) throw std::invalid_argument("zero has no inverse");
  return pow_mod(a, m.value() - 2, m);
}

namespace {

std::uint64_t mul_mod_plain(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % n);
}

std::uint64_t pow_mod_plain(std::uint64_t b, std::uint64_t e, std::uint64_t n) {
  std::uint64_t r = 1;
  b %= n;
  while (e) {
    if (e & 1) r = mul_mod_plain(r, b, n);
    b = mul_mod_plain(b, b, n);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic Miller-Rabin witness set for 64-bit integers.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = pow_mod_plain(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod_plain(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace lhe::ckks
