// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lhe/ckks/modarith.h"
#include "lhe/ckks/ntt.h"
#include "lhe/ckks/params.h"
#include "lhe/ckks/rns_poly.h"

namespace lhe::ckks {

// Immutable per-parameter-set precomputation: primes, NTT tables, encoder
// roots and the RNS constants for rescaling and key switching. Shared
// read-only between encryptors, evaluators and decryptors.
class CkksContext {
 public:
  explicit CkksContext(CkksParams params);

  static std::shared_ptr<const CkksContext> create(CkksParams params) {
    return std::make_shared<const CkksContext>(std::move(params));
  }

  const CkksParams& params() const { return params_; }
  std::uint32_t n() const { return params_.ring_degree; }
  std::uint32_t slot_count() const { return params_.slot_count(); }
  int max_level() const { return params_.max_level(); }

  // Data primes are indices [0, max_level]; the special prime follows.
  std::size_t special_index() const { return moduli_.size() - 1; }
  const Modulus& modulus(std::size_t i) const { return moduli_[i]; }
  std::uint64_t prime(std::size_t i) const { return moduli_[i].value(); }
  const NttTables& ntt(std::size_t i) const { return ntt_[i]; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }

  // q_level^{-1} mod q_i for i < level.
  std::uint64_t inv_prime_mod(std::size_t level, std::size_t i) const { return inv_q_[level][i]; }
  // P^{-1} mod q_i and P mod q_i, P the special prime.
  std::uint64_t inv_special_mod(std::size_t i) const { return inv_p_[i]; }
  std::uint64_t special_mod(std::size_t i) const { return p_mod_[i]; }

  // Galois element implementing a left slot rotation by `step`.
  std::uint64_t galois_element(int step) const;
  // Normalizes a rotation step into [0, slot_count).
  int normalize_step(int step) const;
  // NTT-domain permutation for X -> X^g: out[j] = in[perm[j]].
  std::vector<std::uint32_t> galois_permutation(std::uint64_t galois_elt) const;

  // Canonical-embedding encoding of real slot values at `scale`, returned in
  // NTT form over primes [0, level].
  RnsPoly encode(std::span<const double> values, double scale, int level) const;
  // Encodes a value replicated in every slot (a constant polynomial).
  RnsPoly encode_constant(double value, double scale, int level) const;
  // Rounds value * scale to an integer and reduces it mod every prime in
  // [0, level]; throws CapacityError past 2^62.
  std::vector<std::uint64_t> integer_residues(double value, double scale, int level) const;
  // Decodes centered integer coefficients at `scale` into slot values.
  std::vector<double> decode(std::span<const double> coeffs, double scale) const;

  // Raw embedding transforms (used by tests as well).
  void embed(std::vector<std::complex<double>>& vals) const;
  void embed_inverse(std::vector<std::complex<double>>& vals) const;

 private:
  CkksParams params_;
  std::vector<std::uint64_t> primes_;
  std::vector<Modulus> moduli_;
  std::vector<NttTables> ntt_;
  std::vector<std::vector<std::uint64_t>> inv_q_;
  std::vector<std::uint64_t> inv_p_, p_mod_;
  std::vector<std::complex<double>> ksi_pows_;
  std::vector<std::uint64_t> rot_group_;
  std::vector<std::uint32_t> index_of_exponent_;  // (e - 1) / 2 -> NTT index
};

}  // namespace lhe::ckks
