// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/common/prng.h"

#include <sodium.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace lhe {
namespace {

constexpr std::size_t kBlockBytes = 4096;

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialization failed");
}

}  // namespace

Seed seed_from_u64(std::uint64_t value) {
  ensure_sodium();
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(value >> (8 * i));
  Seed seed;
  crypto_hash_sha256(seed.data(), bytes, sizeof(bytes));
  return seed;
}

Seed random_seed() {
  ensure_sodium();
  Seed seed;
  randombytes_buf(seed.data(), seed.size());
  return seed;
}

Prng::Prng(const Seed& seed) : key_(seed), buffer_(kBlockBytes), pos_(kBlockBytes) {
  ensure_sodium();
}

void Prng::refill() {
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(nonce_ >> (8 * i));
  ++nonce_;
  crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data());
  pos_ = 0;
}

std::uint64_t Prng::next_u64() {
  if (pos_ + 8 > buffer_.size()) refill();
  std::uint64_t v;
  std::memcpy(&v, buffer_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

std::uint64_t Prng::uniform(std::uint64_t bound) {
  // Reject the top partial range so every residue is equally likely.
  const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

int Prng::ternary() {
  std::uint64_t v = next_u64();
  return static_cast<int>(v & 1) - static_cast<int>((v >> 1) & 1);
}

int Prng::centered_binomial(int eta) {
  std::uint64_t v = next_u64();
  int a = std::popcount(v & ((std::uint64_t{1} << eta) - 1));
  int b = std::popcount((v >> 32) & ((std::uint64_t{1} << eta) - 1));
  return a - b;
}

}  // namespace lhe
