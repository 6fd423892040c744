// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "golden.h"
#include "lhe/ckks/evaluator.h"
#include "lhe/ckks/serialize.h"
#include "lhe/common/error.h"

namespace lhe::ckks {
namespace {

TEST(CkksSerialize, ParamsLayoutIsPinned) {
  auto p = CkksParams::preset("test");
  auto bytes = serialize(p);
  // "CKKS", version 1, kind 1, ring degree 256.
  const std::vector<std::uint8_t> head = {'C', 'K', 'K', 'S', 1, 0, 1, 0, 1, 0, 0};
  ASSERT_GE(bytes.size(), head.size());
  EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
  EXPECT_EQ(deserialize_params(bytes), p);
  lhe::testing::expect_golden("params_test.ckks", bytes);
}

TEST(CkksSerialize, KeygenIsDeterministicPerSeed) {
  auto p = CkksParams::preset("test");
  auto a = serialize(keygen(p, {1, 2, 4}, seed_from_u64(5)));
  auto b = serialize(keygen(p, {1, 2, 4}, seed_from_u64(5)));
  auto c = serialize(keygen(p, {1, 2, 4}, seed_from_u64(6)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(keygen(p, {1, 2, 4}, seed_from_u64(5)).eval.rotation_keys.size(), 3u);
}

TEST(CkksSerialize, RoundTripsAndGoldenCiphertext) {
  auto ctx = CkksContext::create(CkksParams::preset("test"));
  auto ks = keygen(*ctx, {1}, seed_from_u64(1));
  Prng prng(seed_from_u64(2));
  auto ct = CkksEncryptor(ctx, ks.eval.public_key).encrypt(std::vector<double>{1.0, -2.5, 0.0, 3.25}, prng);
  auto bytes = serialize(ct);
  EXPECT_EQ(deserialize_ciphertext(bytes), ct);
  lhe::testing::expect_golden("ciphertext_test.ckks", bytes);

  auto mock = MockEncryptor(ctx).encrypt(std::vector<double>{1.0, -2.5}, prng);
  EXPECT_EQ(deserialize_ciphertext(serialize(mock)), mock);
  lhe::testing::expect_golden("ciphertext_mock.ckks", serialize(mock));

  EXPECT_EQ(deserialize_evaluation_keys(serialize(ks.eval)), ks.eval);
  auto full = deserialize_key_set(serialize(ks));
  EXPECT_EQ(full.eval, ks.eval);
  EXPECT_EQ(full.secret_key, ks.secret_key);
  auto [params, sk] = deserialize_secret_key(serialize(ctx->params(), ks.secret_key));
  EXPECT_EQ(params, ctx->params());
  EXPECT_EQ(sk, ks.secret_key);
}

TEST(CkksSerialize, PublicKeyFileCarriesNoSecretBytes) {
  auto p = CkksParams::preset("test");
  auto ks = keygen(p, {1}, seed_from_u64(3));
  auto pub = serialize(ks.eval);
  auto full = serialize(ks);
  auto secret = serialize(p, ks.secret_key);
  EXPECT_LT(pub.size(), full.size());
  // The secret limb bytes never occur in the public file.
  std::vector<std::uint8_t> needle(secret.end() - 64, secret.end());
  EXPECT_EQ(std::search(pub.begin(), pub.end(), needle.begin(), needle.end()), pub.end());
  EXPECT_NE(std::search(full.begin(), full.end(), needle.begin(), needle.end()), full.end());
}

TEST(CkksSerialize, RejectsCorruptInput) {
  auto bytes = serialize(CkksParams::preset("test"));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_params(bad), FormatError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(deserialize_params(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(deserialize_params(bad), FormatError);
  EXPECT_THROW(deserialize_ciphertext(bytes), FormatError);
}

TEST(CkksSerialize, FingerprintDistinguishesParams) {
  auto a = CkksParams::preset("test");
  auto b = a;
  b.default_scale *= 2;
  EXPECT_EQ(params_fingerprint(a), params_fingerprint(CkksParams::preset("test")));
  EXPECT_NE(params_fingerprint(a), params_fingerprint(b));
  EXPECT_EQ(params_fingerprint(a).size(), 64u);
}

}  // namespace
}  // namespace lhe::ckks
