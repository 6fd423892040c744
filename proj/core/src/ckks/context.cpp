// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/context.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "lhe/common/error.h"

namespace lhe::ckks {
namespace {

void bit_reverse_permute(std::vector<std::complex<double>>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }
}

constexpr double kMaxCoefficient = 4611686018427387904.0;  // 2^62

}  // namespace

CkksContext::CkksContext(CkksParams params) : params_(std::move(params)) {
  params_.validate();
  primes_ = generate_primes(params_);
  const std::uint32_t n = params_.ring_degree;
  for (std::uint64_t q : primes_) {
    if ((q - 1) % (2ull * n) != 0) throw ParamError("prime not 1 mod 2N");
    moduli_.emplace_back(q);
    ntt_.emplace_back(n, moduli_.back());
  }
  for (std::size_t i = 1; i < ntt_.size(); ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (ntt_[i].exponent(j) != ntt_[0].exponent(j)) throw ParamError("inconsistent NTT ordering across primes");
    }
  }
  const double log_scale = std::log2(params_.default_scale);
  for (int i = 0; i + 1 <= max_level(); ++i) {
    if (std::log2(static_cast<double>(primes_[i])) + std::log2(static_cast<double>(primes_[i + 1])) <= 2 * log_scale) {
      throw ParamError("default_scale^2 must be below the product of adjacent chain moduli");
    }
  }

  const int levels = max_level() + 1;
  inv_q_.resize(levels);
  for (int l = 1; l < levels; ++l) {
    for (int i = 0; i < l; ++i) inv_q_[l].push_back(inv_mod(primes_[l] % primes_[i], moduli_[i]));
  }
  const std::uint64_t p = primes_.back();
  for (int i = 0; i < levels; ++i) {
    p_mod_.push_back(p % primes_[i]);
    inv_p_.push_back(inv_mod(p_mod_.back(), moduli_[i]));
  }

  const std::uint32_t m = 2 * n;
  ksi_pows_.resize(m + 1);
  for (std::uint32_t j = 0; j <= m; ++j) {
    double angle = 2.0 * std::numbers::pi * j / m;
    ksi_pows_[j] = {std::cos(angle), std::sin(angle)};
  }
  rot_group_.resize(n / 2);
  std::uint64_t five = 1;
  for (std::uint32_t j = 0; j < n / 2; ++j) {
    rot_group_[j] = five;
    five = five * 5 % m;
  }
  index_of_exponent_.resize(n);
  for (std::uint32_t j = 0; j < n; ++j) index_of_exponent_[(ntt_[0].exponent(j) - 1) / 2] = j;
}

int CkksContext::normalize_step(int step) const {
  const int slots = static_cast<int>(slot_count());
  int s = step % slots;
  return s < 0 ? s + slots : s;
}

std::uint64_t CkksContext::galois_element(int step) const { return rot_group_[normalize_step(step)]; }

std::vector<std::uint32_t> CkksContext::galois_permutation(std::uint64_t galois_elt) const {
  const std::uint32_t n = this->n();
  const std::uint64_t m = 2ull * n;
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    std::uint64_t e = static_cast<std::uint64_t>(ntt_[0].exponent(j)) * galois_elt % m;
    perm[j] = index_of_exponent_[(e - 1) / 2];
  }
  return perm;
}

void CkksContext::embed_inverse(std::vector<std::complex<double>>& vals) const {
  const std::size_t slots = vals.size();
  const std::uint64_t m = 2ull * n();
  for (std::size_t len = slots; len >= 1; len >>= 1) {
    for (std::size_t i = 0; i < slots; i += len) {
      const std::size_t lenh = len >> 1;
      const std::uint64_t lenq = len << 2;
      const std::uint64_t gap = m / lenq;
      for (std::size_t j = 0; j < lenh; ++j) {
        std::uint64_t idx = (lenq - (rot_group_[j] % lenq)) * gap;
        auto u = vals[i + j] + vals[i + j + lenh];
        auto v = (vals[i + j] - vals[i + j + lenh]) * ksi_pows_[idx];
        vals[i + j] = u;
        vals[i + j + lenh] = v;
      }
    }
  }
  bit_reverse_permute(vals);
  for (auto& v : vals) v /= static_cast<double>(slots);
}

void CkksContext::embed(std::vector<std::complex<double>>& vals) const {
  const std::size_t slots = vals.size();
  const std::uint64_t m = 2ull * n();
  bit_reverse_permute(vals);
  for (std::size_t len = 2; len <= slots; len <<= 1) {
    for (std::size_t i = 0; i < slots; i += len) {
      const std::size_t lenh = len >> 1;
      const std::uint64_t lenq = len << 2;
      const std::uint64_t gap = m / lenq;
      for (std::size_t j = 0; j < lenh; ++j) {
        std::uint64_t idx = (rot_group_[j] % lenq) * gap;
        auto u = vals[i + j];
        auto v = vals[i + j + lenh] * ksi_pows_[idx];
        vals[i + j] = u + v;
        vals[i + j + lenh] = u - v;
      }
    }
  }
}

RnsPoly CkksContext::encode(std::span<const double> values, double scale, int level) const {
  const std::uint32_t slots = slot_count();
  if (values.size() > slots) throw CapacityError("vector longer than slot_count");
  if (level < 0 || level > max_level()) throw DepthError("encode: level out of range");
  std::vector<std::complex<double>> vals(slots);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw CapacityError("non-finite slot value");
    vals[i] = values[i];
  }
  embed_inverse(vals);
  std::vector<std::int64_t> coeffs(n());
  for (std::uint32_t i = 0; i < slots; ++i) {
    double re = std::round(vals[i].real() * scale);
    double im = std::round(vals[i].imag() * scale);
    if (std::abs(re) >= kMaxCoefficient || std::abs(im) >= kMaxCoefficient) {
      throw CapacityError("encoded coefficient exceeds 2^62; lower the scale or the values");
    }
    coeffs[i] = static_cast<std::int64_t>(re);
    coeffs[i + slots] = static_cast<std::int64_t>(im);
  }
  RnsPoly poly(n(), static_cast<std::size_t>(level) + 1);
  for (int l = 0; l <= level; ++l) {
    auto limb = poly.limb(l);
    const std::uint64_t q = primes_[l];
    for (std::uint32_t i = 0; i < n(); ++i) limb[i] = from_signed(coeffs[i], q);
    ntt_[l].forward(limb);
  }
  return poly;
}

std::vector<std::uint64_t> CkksContext::integer_residues(double value, double scale, int level) const {
  double v = std::round(value * scale);
  if (!std::isfinite(v) || std::abs(v) >= kMaxCoefficient) {
    throw CapacityError("scaled constant exceeds 2^62; lower the scale or the value");
  }
  auto iv = static_cast<std::int64_t>(v);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(level) + 1);
  for (int l = 0; l <= level; ++l) out[l] = from_signed(iv, primes_[l]);
  return out;
}

RnsPoly CkksContext::encode_constant(double value, double scale, int level) const {
  auto residues = integer_residues(value, scale, level);
  RnsPoly poly(n(), residues.size());
  for (std::size_t l = 0; l < residues.size(); ++l) std::ranges::fill(poly.limb(l), residues[l]);
  return poly;
}

std::vector<double> CkksContext::decode(std::span<const double> coeffs, double scale) const {
  const std::uint32_t slots = slot_count();
  std::vector<std::complex<double>> vals(slots);
  for (std::uint32_t i = 0; i < slots; ++i) vals[i] = {coeffs[i] / scale, coeffs[i + slots] / scale};
  embed(vals);
  std::vector<double> out(slots);
  for (std::uint32_t i = 0; i < slots; ++i) out[i] = vals[i].real();
  return out;
}

}  // namespace lhe::ckks
