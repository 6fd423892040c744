// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/serialize.h"

#include <sodium.h>

#include <cstdio>

#include "lhe/common/error.h"

namespace lhe::ckks {
namespace {

constexpr std::uint32_t kMaxRing = 1u << 17;
constexpr std::uint32_t kMaxLimbs = 64;

void write_header(ByteWriter& w, ObjectKind kind) {
  w.magic("CKKS");
  w.u16(kCkksFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind));
}

void read_header(ByteReader& r, ObjectKind kind) {
  r.expect_magic("CKKS");
  const std::uint16_t version = r.u16();
  if (version != kCkksFormatVersion) throw FormatError("unsupported CKKS format version " + std::to_string(version));
  const std::uint8_t k = r.u8();
  if (k != static_cast<std::uint8_t>(kind)) throw FormatError("unexpected CKKS object kind " + std::to_string(k));
}

void expect_done(const ByteReader& r) {
  if (!r.done()) throw FormatError("trailing bytes after CKKS object");
}

void write_switch_key(ByteWriter& w, const KeySwitchKey& k) {
  w.u32(static_cast<std::uint32_t>(k.b.size()));
  for (std::size_t j = 0; j < k.b.size(); ++j) {
    write_poly(w, k.b[j]);
    write_poly(w, k.a[j]);
  }
}

KeySwitchKey read_switch_key(ByteReader& r) {
  KeySwitchKey k;
  const std::uint32_t digits = r.u32();
  if (digits > kMaxLimbs) throw FormatError("implausible key-switch digit count");
  for (std::uint32_t j = 0; j < digits; ++j) {
    k.b.push_back(read_poly(r));
    k.a.push_back(read_poly(r));
  }
  return k;
}

void write_eval_body(ByteWriter& w, const EvaluationKeys& keys) {
  write_params(w, keys.params);
  write_poly(w, keys.public_key.b);
  write_poly(w, keys.public_key.a);
  write_switch_key(w, keys.relin_key);
  w.u32(static_cast<std::uint32_t>(keys.rotation_keys.size()));
  for (const auto& [step, key] : keys.rotation_keys) {
    w.i32(step);
    write_switch_key(w, key);
  }
}

EvaluationKeys read_eval_body(ByteReader& r) {
  EvaluationKeys keys;
  keys.params = read_params(r);
  keys.public_key.b = read_poly(r);
  keys.public_key.a = read_poly(r);
  keys.relin_key = read_switch_key(r);
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const int step = r.i32();
    if (!keys.rotation_keys.emplace(step, read_switch_key(r)).second) throw FormatError("duplicate rotation key step");
  }
  return keys;
}

}  // namespace

void write_params(ByteWriter& w, const CkksParams& p) {
  w.u32(p.ring_degree);
  w.u32(static_cast<std::uint32_t>(p.modulus_bits.size()));
  for (int b : p.modulus_bits) w.i32(b);
  w.i32(p.special_bits);
  w.f64(p.default_scale);
  w.str(p.security_note);
}

CkksParams read_params(ByteReader& r) {
  CkksParams p;
  p.ring_degree = r.u32();
  const std::uint32_t count = r.u32();
  if (count > kMaxLimbs) throw FormatError("implausible modulus chain length");
  for (std::uint32_t i = 0; i < count; ++i) p.modulus_bits.push_back(r.i32());
  p.special_bits = r.i32();
  p.default_scale = r.f64();
  p.security_note = r.str();
  return p;
}

void write_poly(ByteWriter& w, const RnsPoly& p) {
  w.u32(p.n());
  w.u32(static_cast<std::uint32_t>(p.limbs()));
  w.u64_array(p.data());
}

RnsPoly read_poly(ByteReader& r) {
  const std::uint32_t n = r.u32();
  const std::uint32_t limbs = r.u32();
  if (n > kMaxRing || limbs > kMaxLimbs) throw FormatError("implausible polynomial dimensions");
  if (r.remaining() / 8 < static_cast<std::size_t>(n) * limbs) throw FormatError("unexpected end of data");
  RnsPoly p(n, limbs);
  r.u64_array(p.data());
  return p;
}

void write_ciphertext(ByteWriter& w, const Ciphertext& ct) {
  w.u8(static_cast<std::uint8_t>(ct.backend));
  w.i32(ct.level);
  w.f64(ct.scale);
  if (ct.backend == Backend::kReal) {
    w.u32(static_cast<std::uint32_t>(ct.polys.size()));
    for (const auto& p : ct.polys) write_poly(w, p);
  } else {
    w.u32(static_cast<std::uint32_t>(ct.slots.size()));
    for (double v : ct.slots) w.f64(v);
  }
}

Ciphertext read_ciphertext(ByteReader& r) {
  Ciphertext ct;
  const std::uint8_t backend = r.u8();
  if (backend > 1) throw FormatError("unknown ciphertext backend tag");
  ct.backend = static_cast<Backend>(backend);
  ct.level = r.i32();
  ct.scale = r.f64();
  const std::uint32_t count = r.u32();
  if (ct.backend == Backend::kReal) {
    if (count > 3) throw FormatError("implausible ciphertext component count");
    for (std::uint32_t i = 0; i < count; ++i) ct.polys.push_back(read_poly(r));
  } else {
    if (count > kMaxRing || r.remaining() / 8 < count) throw FormatError("implausible mock slot count");
    ct.slots.resize(count);
    for (auto& v : ct.slots) v = r.f64();
  }
  return ct;
}

std::vector<std::uint8_t> serialize(const CkksParams& p) {
  ByteWriter w;
  write_header(w, ObjectKind::kParams);
  write_params(w, p);
  return w.take();
}

std::vector<std::uint8_t> serialize(const Ciphertext& ct) {
  ByteWriter w;
  write_header(w, ObjectKind::kCiphertext);
  write_ciphertext(w, ct);
  return w.take();
}

std::vector<std::uint8_t> serialize(const EvaluationKeys& keys) {
  ByteWriter w;
  write_header(w, ObjectKind::kEvaluationKeys);
  write_eval_body(w, keys);
  return w.take();
}

std::vector<std::uint8_t> serialize(const KeySet& keys) {
  ByteWriter w;
  write_header(w, ObjectKind::kKeySet);
  write_eval_body(w, keys.eval);
  write_poly(w, keys.secret_key.s);
  return w.take();
}

std::vector<std::uint8_t> serialize(const CkksParams& params, const SecretKey& sk) {
  ByteWriter w;
  write_header(w, ObjectKind::kSecretKey);
  write_params(w, params);
  write_poly(w, sk.s);
  return w.take();
}

CkksParams deserialize_params(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ObjectKind::kParams);
  auto p = read_params(r);
  expect_done(r);
  return p;
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ObjectKind::kCiphertext);
  auto ct = read_ciphertext(r);
  expect_done(r);
  return ct;
}

EvaluationKeys deserialize_evaluation_keys(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ObjectKind::kEvaluationKeys);
  auto keys = read_eval_body(r);
  expect_done(r);
  return keys;
}

KeySet deserialize_key_set(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ObjectKind::kKeySet);
  KeySet ks;
  ks.eval = read_eval_body(r);
  ks.secret_key.s = read_poly(r);
  expect_done(r);
  return ks;
}

std::pair<CkksParams, SecretKey> deserialize_secret_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ObjectKind::kSecretKey);
  CkksParams p = read_params(r);
  SecretKey sk{read_poly(r)};
  expect_done(r);
  return {std::move(p), std::move(sk)};
}

ObjectKind object_kind(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("CKKS");
  const std::uint16_t version = r.u16();
  if (version != kCkksFormatVersion) throw FormatError("unsupported CKKS format version " + std::to_string(version));
  const std::uint8_t k = r.u8();
  if (k < 1 || k > 5) throw FormatError("unknown CKKS object kind " + std::to_string(k));
  return static_cast<ObjectKind>(k);
}

std::string params_fingerprint(const CkksParams& p) {
  ByteWriter w;
  write_params(w, p);
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, w.bytes().data(), w.bytes().size());
  std::string hex(2 * sizeof(digest), '0');
  for (std::size_t i = 0; i < sizeof(digest); ++i) std::snprintf(&hex[2 * i], 3, "%02x", digest[i]);
  return hex;
}

}  // namespace lhe::ckks
