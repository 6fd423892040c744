// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lhe {

using Seed = std::array<std::uint8_t, 32>;

// Derives a 32-byte seed from a 64-bit value (SHA-256 of its LE bytes).
Seed seed_from_u64(std::uint64_t value);

// Fresh seed from the OS entropy source.
Seed random_seed();

// ChaCha20 keystream generator. Deterministic for a given seed, so key
// generation and encryption are reproducible when an explicit seed is passed.
class Prng {
 public:
  explicit Prng(const Seed& seed);

  std::uint64_t next_u64();
  // Uniform in [0, bound) by rejection sampling.
  std::uint64_t uniform(std::uint64_t bound);
  // {-1, 0, 1} with probabilities 1/4, 1/2, 1/4.
  int ternary();
  // Centered binomial with parameter eta (variance eta / 2).
  int centered_binomial(int eta);

 private:
  void refill();

  Seed key_;
  std::uint64_t nonce_ = 0;
  std::vector<std::uint8_t> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace lhe
