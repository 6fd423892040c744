// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "lhe/ckks/context.h"
#include "lhe/ckks/params.h"
#include "lhe/ckks/rns_poly.h"
#include "lhe/common/prng.h"

namespace lhe::ckks {

// Ternary secret in NTT form over every prime, special prime included.
// Only the client ever holds one.
struct SecretKey {
  RnsPoly s;
  bool operator==(const SecretKey&) const = default;
};

// RLWE pair (b, a) with b = -a*s + e over the data primes.
struct PublicKey {
  RnsPoly b, a;
  bool operator==(const PublicKey&) const = default;
};

// Hybrid key-switching key: one RLWE pair per data prime (digit), each over
// all data primes plus the special prime. Digit j encrypts P * s' on limb j.
struct KeySwitchKey {
  std::vector<RnsPoly> b, a;
  bool operator==(const KeySwitchKey&) const = default;
};

// Everything a server may hold: no secret material.
struct EvaluationKeys {
  CkksParams params;
  PublicKey public_key;
  KeySwitchKey relin_key;
  std::map<int, KeySwitchKey> rotation_keys;  // normalized step -> key

  std::set<int> rotation_steps() const;
  bool operator==(const EvaluationKeys&) const = default;
};

struct KeySet {
  SecretKey secret_key;
  EvaluationKeys eval;
};

// Power-of-two steps 1, 2, 4, ..., slot_count/2.
std::set<int> power_of_two_steps(std::uint32_t slot_count);

// Generates a key set with rotation keys for exactly `rotation_steps`
// (normalized into [0, slot_count); step 0 needs no key and is dropped).
KeySet keygen(const CkksContext& ctx, const std::set<int>& rotation_steps, const Seed& seed);
KeySet keygen(const CkksParams& params, const std::set<int>& rotation_steps, const Seed& seed);

// Key switching key taking `target` (NTT form, all primes) to the secret key.
KeySwitchKey make_switch_key(const CkksContext& ctx, const SecretKey& sk, const RnsPoly& target, Prng& prng);

}  // namespace lhe::ckks
