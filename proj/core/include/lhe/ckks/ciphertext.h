// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lhe/ckks/rns_poly.h"

namespace lhe::ckks {

enum class Backend : std::uint8_t { kReal = 0, kMock = 1 };

// Encoded (not encrypted) slot vector at a given level and scale. The mock
// backend keeps the slot values themselves.
struct Plaintext {
  RnsPoly poly;
  std::vector<double> values;
  int level = 0;
  double scale = 1.0;
  Backend backend = Backend::kReal;
};

// Encrypted slot vector. Real ciphertexts hold two ring elements in NTT form
// over primes [0, level]; mock ciphertexts hold the slot values verbatim with
// identical level/scale bookkeeping.
struct Ciphertext {
  std::vector<RnsPoly> polys;
  std::vector<double> slots;
  int level = 0;
  double scale = 1.0;
  Backend backend = Backend::kReal;

  bool operator==(const Ciphertext&) const = default;
};

using SlotVector = std::vector<double>;

}  // namespace lhe::ckks
