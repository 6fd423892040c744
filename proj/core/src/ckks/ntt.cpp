// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/ntt.h"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace lhe::ckks {
namespace {

std::uint32_t bit_reverse(std::uint32_t x, int bits) {
  std::uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

std::uint64_t find_psi(std::uint32_t n, const Modulus& m) {
  const std::uint64_t q = m.value();
  if ((q - 1) % (2ull * n) != 0) throw std::invalid_argument("prime is not 1 mod 2N");
  for (std::uint64_t x = 2; x < q; ++x) {
    std::uint64_t psi = pow_mod(x, (q - 1) / (2ull * n), m);
    if (pow_mod(psi, n, m) == q - 1) return psi;
  }
  throw std::invalid_argument("no primitive 2N-th root");
}

}  // namespace

NttTables::NttTables(std::uint32_t n, const Modulus& modulus) : n_(n), modulus_(modulus) {
  const int log_n = std::countr_zero(n);
  const std::uint64_t q = modulus.value();
  psi_ = find_psi(n, modulus);
  const std::uint64_t psi_inv = inv_mod(psi_, modulus);
  roots_.resize(n);
  inv_roots_.resize(n);
  roots_shoup_.resize(n);
  inv_roots_shoup_.resize(n);
  std::vector<std::uint64_t> pw(n), ipw(n);
  pw[0] = ipw[0] = 1;
  for (std::uint32_t i = 1; i < n; ++i) {
    pw[i] = mul_mod(pw[i - 1], psi_, modulus);
    ipw[i] = mul_mod(ipw[i - 1], psi_inv, modulus);
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t r = bit_reverse(i, log_n);
    roots_[i] = pw[r];
    inv_roots_[i] = ipw[r];
    roots_shoup_[i] = shoup_precompute(roots_[i], q);
    inv_roots_shoup_[i] = shoup_precompute(inv_roots_[i], q);
  }
  inv_n_ = inv_mod(n, modulus);
  inv_n_shoup_ = shoup_precompute(inv_n_, q);

  // Read the evaluation points off the transform of X.
  std::vector<std::uint64_t> x(n, 0);
  if (n > 1) x[1] = 1;
  forward(x);
  exponents_.resize(n);
  // psi^e for odd e is unique; build a lookup by walking powers.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> odd_powers;
  odd_powers.reserve(n);
  for (std::uint32_t e = 1; e < 2 * n; e += 2) {
    odd_powers.emplace_back(e < n ? pw[e] : q - pw[e - n], e);
  }
  std::sort(odd_powers.begin(), odd_powers.end());
  for (std::uint32_t j = 0; j < n; ++j) {
    auto it = std::lower_bound(odd_powers.begin(), odd_powers.end(), std::make_pair(x[j], 0u));
    if (it == odd_powers.end() || it->first != x[j]) throw std::logic_error("NTT evaluation point not found");
    exponents_[j] = it->second;
  }
}

void NttTables::forward(std::span<std::uint64_t> a) const {
  const std::uint64_t q = modulus_.value();
  const std::uint64_t two_q = 2 * q;
  std::uint32_t t = n_;
  for (std::uint32_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint64_t w = roots_[m + i];
      const std::uint64_t ws = roots_shoup_[m + i];
      std::uint64_t* x = a.data() + 2 * i * t;
      std::uint64_t* y = x + t;
      for (std::uint32_t j = 0; j < t; ++j) {
        std::uint64_t u = x[j];
        if (u >= two_q) u -= two_q;
        std::uint64_t v = mul_shoup_lazy(y[j], w, ws, q);
        x[j] = u + v;
        y[j] = u + two_q - v;
      }
    }
  }
  for (auto& v : a) {
    if (v >= two_q) v -= two_q;
    if (v >= q) v -= q;
  }
}

void NttTables::inverse(std::span<std::uint64_t> a) const {
  const std::uint64_t q = modulus_.value();
  const std::uint64_t two_q = 2 * q;
  std::uint32_t t = 1;
  for (std::uint32_t m = n_ >> 1; m >= 1; m >>= 1) {
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint64_t w = inv_roots_[m + i];
      const std::uint64_t ws = inv_roots_shoup_[m + i];
      std::uint64_t* x = a.data() + 2 * i * t;
      std::uint64_t* y = x + t;
      for (std::uint32_t j = 0; j < t; ++j) {
        std::uint64_t u = x[j];
        std::uint64_t v = y[j];
        std::uint64_t s = u + v;
        if (s >= two_q) s -= two_q;
        x[j] = s;
        y[j] = mul_shoup_lazy(u + two_q - v, w, ws, q);
      }
    }
    t <<= 1;
  }
  for (auto& v : a) v = mul_shoup(v, inv_n_, inv_n_shoup_, q);
}

}  // namespace lhe::ckks
