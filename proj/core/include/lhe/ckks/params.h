// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lhe::ckks {

// Ring and modulus-chain configuration.
//
// `modulus_bits` lists the data primes from level 0 (the base prime, last to
// be consumed) upward; a fresh ciphertext sits at level modulus_bits.size()-1
// and every rescaling multiply drops the top prime. `special_bits` sizes the
// extra prime used only inside key switching.
struct CkksParams {
  std::uint32_t ring_degree = 0;
  std::vector<int> modulus_bits;
  int special_bits = 60;
  double default_scale = 0.0;
  std::string security_note;

  std::uint32_t slot_count() const { return ring_degree / 2; }
  int max_level() const { return static_cast<int>(modulus_bits.size()) - 1; }
  // Number of rescaling multiplies a fresh ciphertext supports.
  int usable_levels() const { return max_level(); }

  // Throws ParamError naming the first violated invariant. Prime-dependent
  // invariants are checked when the context is built.
  void validate() const;

  bool operator==(const CkksParams&) const = default;

  // Named presets: "default", "resnet20", "resnet20-se", "ops", "test".
  static CkksParams preset(const std::string& name);
  static std::vector<std::string> preset_names();
  // Smallest ring that fits `slot_demand` slots, with the given chain.
  static CkksParams for_slot_demand(std::uint32_t slot_demand, std::vector<int> modulus_bits,
                                    double default_scale = 1099511627776.0);
};

// Deterministic prime search: for each requested bit size b, walks upward
// from 2^b + 1 in steps of 2N and keeps primes (so every prime is 1 mod 2N).
// Repeated sizes continue the walk, so all primes are distinct. Returns the
// data primes followed by the special prime.
std::vector<std::uint64_t> generate_primes(const CkksParams& params);

}  // namespace lhe::ckks
