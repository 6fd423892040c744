// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lhe::ckks {

// Ring element in RNS form: `limbs` residue polynomials of N coefficients,
// stored contiguously. Limb i is reduced modulo the context's prime i; an
// extended element (inside key switching) carries the special prime as its
// last limb. Elements held by ciphertexts, plaintexts and keys are always in
// NTT (evaluation) form.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(std::uint32_t n, std::size_t limbs) : n_(n), limbs_(limbs), data_(static_cast<std::size_t>(n) * limbs, 0) {}

  std::uint32_t n() const { return n_; }
  std::size_t limbs() const { return limbs_; }

  std::span<std::uint64_t> limb(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const std::uint64_t> limb(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  std::span<std::uint64_t> data() { return data_; }
  std::span<const std::uint64_t> data() const { return data_; }

  // Keeps the first `count` limbs.
  void truncate(std::size_t count) {
    limbs_ = count;
    data_.resize(static_cast<std::size_t>(n_) * count);
  }

  bool operator==(const RnsPoly&) const = default;

 private:
  std::uint32_t n_ = 0;
  std::size_t limbs_ = 0;
  std::vector<std::uint64_t> data_;
};

}  // namespace lhe::ckks
