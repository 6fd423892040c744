// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lhe/ckks/modarith.h"

namespace lhe::ckks {

// Negacyclic number-theoretic transform over Z_q[X]/(X^N + 1).
//
// Forward output is in bit-reversed order; slot j holds the evaluation at
// psi^exponent(j) for a primitive 2N-th root psi. Uses Harvey's lazy
// butterflies, so q must stay below 2^61.
class NttTables {
 public:
  NttTables(std::uint32_t n, const Modulus& modulus);

  void forward(std::span<std::uint64_t> a) const;
  void inverse(std::span<std::uint64_t> a) const;

  std::uint32_t size() const { return n_; }
  const Modulus& modulus() const { return modulus_; }
  std::uint64_t psi() const { return psi_; }
  // Odd exponent e such that forward(a)[j] == a(psi^e).
  std::uint32_t exponent(std::uint32_t j) const { return exponents_[j]; }

 private:
  std::uint32_t n_;
  Modulus modulus_;
  std::uint64_t psi_;
  std::vector<std::uint64_t> roots_, roots_shoup_;
  std::vector<std::uint64_t> inv_roots_, inv_roots_shoup_;
  std::uint64_t inv_n_, inv_n_shoup_;
  std::vector<std::uint32_t> exponents_;
};

}  // namespace lhe::ckks
