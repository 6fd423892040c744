// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lhe/ckks/ciphertext.h"
#include "lhe/ckks/keys.h"
#include "lhe/ckks/params.h"
#include "lhe/common/bytes.h"

namespace lhe::ckks {

// Every object starts with "CKKS", a u16 format version and a u8 object kind.
// Integers are little-endian, RNS limbs are u64 arrays (limb-major).
inline constexpr std::uint16_t kCkksFormatVersion = 1;

enum class ObjectKind : std::uint8_t {
  kParams = 1,
  kCiphertext = 2,
  kEvaluationKeys = 3,  // public material only
  kKeySet = 4,          // evaluation keys followed by the secret key
  kSecretKey = 5,
};

// Unframed bodies, for embedding in larger messages.
void write_params(ByteWriter& w, const CkksParams& p);
CkksParams read_params(ByteReader& r);
void write_poly(ByteWriter& w, const RnsPoly& p);
RnsPoly read_poly(ByteReader& r);
void write_ciphertext(ByteWriter& w, const Ciphertext& ct);
Ciphertext read_ciphertext(ByteReader& r);

std::vector<std::uint8_t> serialize(const CkksParams& p);
std::vector<std::uint8_t> serialize(const Ciphertext& ct);
std::vector<std::uint8_t> serialize(const EvaluationKeys& keys);
std::vector<std::uint8_t> serialize(const KeySet& keys);
std::vector<std::uint8_t> serialize(const CkksParams& params, const SecretKey& sk);

CkksParams deserialize_params(std::span<const std::uint8_t> bytes);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes);
EvaluationKeys deserialize_evaluation_keys(std::span<const std::uint8_t> bytes);
KeySet deserialize_key_set(std::span<const std::uint8_t> bytes);
// Returns the secret key and the params it was generated for.
std::pair<CkksParams, SecretKey> deserialize_secret_key(std::span<const std::uint8_t> bytes);

// Hex SHA-256 of the serialized parameter body.
// Kind recorded in a serialized object's header; FormatError if there is none.
ObjectKind object_kind(std::span<const std::uint8_t> bytes);

std::string params_fingerprint(const CkksParams& p);

}  // namespace lhe::ckks
