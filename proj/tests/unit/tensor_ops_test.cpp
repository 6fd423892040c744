// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lhe/common/error.h"
#include "lhe/tensor/reference.h"
#include "test_util.h"

namespace lhe::tensor {
namespace {

using lhe::testing::max_abs_diff;
using lhe::testing::random_conv;
using lhe::testing::random_se;
using lhe::testing::random_tensor;

class PackedOps : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = ckks::CkksContext::create(ckks::CkksParams::preset("ops"));
    keys_ = new ckks::KeySet(ckks::keygen(*ctx_, lhe::testing::operator_steps(8), seed_from_u64(17)));
    eval_ = std::make_shared<const ckks::EvaluationKeys>(keys_->eval);
  }
  static void TearDownTestSuite() { delete keys_; }

  ckks::CkksEvaluator real() const { return ckks::CkksEvaluator(ctx_, eval_); }
  ckks::MockEvaluator mock() const { return ckks::MockEvaluator(ctx_); }
  PackedTensor enc_real(const Tensor& t) const {
    Prng prng(seed_from_u64(99));
    return pack(t, ckks::CkksEncryptor(ctx_, keys_->eval.public_key), prng);
  }
  PackedTensor enc_mock(const Tensor& t) const {
    Prng prng(seed_from_u64(99));
    return pack(t, ckks::MockEncryptor(ctx_), prng);
  }
  Tensor dec_real(const PackedTensor& x) const { return unpack(x, ckks::CkksDecryptor(ctx_, keys_->secret_key)); }
  Tensor dec_mock(const PackedTensor& x) const { return unpack(x, ckks::MockDecryptor()); }

  // Largest |slot| outside the valid region.
  double invalid_slot_max(const PackedTensor& x) const {
    ckks::CkksDecryptor dec(ctx_, keys_->secret_key);
    const auto mask = valid_mask(x.height, x.width, x.stride_phase, ctx_->slot_count());
    double m = 0;
    for (const auto& ct : x.channels) {
      const auto slots = dec.decrypt(ct);
      for (std::size_t i = 0; i < slots.size(); ++i)
        if (mask[i] == 0.0) m = std::max(m, std::abs(slots[i]));
    }
    return m;
  }

  static std::shared_ptr<const ckks::CkksContext> ctx_;
  static ckks::KeySet* keys_;
  static std::shared_ptr<const ckks::EvaluationKeys> eval_;
};

std::shared_ptr<const ckks::CkksContext> PackedOps::ctx_;
ckks::KeySet* PackedOps::keys_ = nullptr;
std::shared_ptr<const ckks::EvaluationKeys> PackedOps::eval_;

TEST_F(PackedOps, PackUnpackRoundTrip) {
  auto t = random_tensor(8, 8, 2, 1);
  auto x = enc_real(t);
  EXPECT_EQ(x.channels.size(), 2u);
  EXPECT_EQ(x.stride_phase, 1u);
  EXPECT_LE(max_abs_diff(dec_real(x), t), 1e-5);
  EXPECT_EQ(dec_mock(enc_mock(t)), t);
  EXPECT_LE(max_abs_diff(dec_real(enc_real(Tensor(8, 8, 2))), Tensor(8, 8, 2)), 1e-5);
  Prng prng(seed_from_u64(0));
  EXPECT_THROW(pack(Tensor(64, 64, 1), ckks::MockEncryptor(ctx_), prng), CapacityError);
}

TEST_F(PackedOps, ConvMatchesReferenceForBothStrides) {
  for (std::uint32_t stride : {1u, 2u}) {
    auto t = random_tensor(8, 8, 2, 10 + stride);
    auto w = random_conv(3, 2, 3, stride, 20 + stride);
    auto want = reference::conv2d(t, w);
    auto m = conv2d(mock(), enc_mock(t), w);
    EXPECT_EQ(dec_mock(m), want);
    auto x = enc_real(t);
    auto r = conv2d(real(), x, w);
    EXPECT_EQ(r.level(), x.level() - kConvCost);
    EXPECT_EQ(r.stride_phase, stride);
    EXPECT_EQ(r.height, 8u);
    EXPECT_LE(max_abs_diff(dec_real(r), want), 1e-3);
    EXPECT_LE(invalid_slot_max(r), 1e-3);
  }
}

TEST_F(PackedOps, ConvIdentityAndAveragingKernels) {
  auto t = random_tensor(8, 8, 2, 3);
  ConvWeights id;
  id.out_channels = id.in_channels = 2;
  id.kernel_h = id.kernel_w = 1;
  id.weights = {1, 0, 0, 1};
  id.bias = {0, 0};
  EXPECT_LE(max_abs_diff(dec_real(conv2d(real(), enc_real(t), id)), t), 1e-3);

  ConvWeights avg;
  avg.out_channels = avg.in_channels = 1;
  avg.kernel_h = avg.kernel_w = 3;
  avg.weights.assign(9, 1.0 / 9);
  avg.bias = {0};
  auto out = dec_real(conv2d(real(), enc_real(Tensor(8, 8, 1, 5.0)), avg));
  for (std::uint32_t i = 1; i < 7; ++i)
    for (std::uint32_t j = 1; j < 7; ++j) EXPECT_NEAR(out.at(i, j, 0), 5.0, 1e-3);
}

TEST_F(PackedOps, StridedConvChainsKeepPhase) {
  auto t = random_tensor(8, 8, 2, 4);
  auto w1 = random_conv(2, 2, 3, 2, 5);
  auto w2 = random_conv(2, 2, 3, 1, 6);
  auto w3 = random_conv(2, 2, 1, 2, 7);
  auto want = reference::conv2d(reference::conv2d(reference::conv2d(t, w1), w2), w3);
  auto m = conv2d(mock(), conv2d(mock(), conv2d(mock(), enc_mock(t), w1), w2), w3);
  EXPECT_EQ(m.stride_phase, 4u);
  EXPECT_EQ(dec_mock(m), want);
  auto r = conv2d(real(), conv2d(real(), conv2d(real(), enc_real(t), w1), w2), w3);
  EXPECT_LE(max_abs_diff(dec_real(r), want), 1e-3);
}

TEST_F(PackedOps, PolyactCases) {
  auto t = random_tensor(8, 8, 2, 8, 3.0);
  auto k = ActivationCoeffs::polyact(0.3, -0.7, 0.25);
  auto want = reference::activation(t, k);
  EXPECT_EQ(dec_mock(polyact(mock(), enc_mock(t), k)), want);
  auto x = enc_real(t);
  auto r = polyact(real(), x, k);
  EXPECT_EQ(r.level(), x.level() - kPolyactCost);
  EXPECT_LE(max_abs_diff(dec_real(r), want), 1e-3);
  EXPECT_LE(invalid_slot_max(r), 1e-3);
  EXPECT_LE(max_abs_diff(dec_real(polyact(real(), x, ActivationCoeffs::polyact(0, 1, 0))), t), 1e-3);
  EXPECT_NEAR(dec_real(polyact(real(), enc_real(Tensor(8, 8, 1, 3.0)), ActivationCoeffs::polyact(1, 0, 0))).at(2, 3, 0),
              9.0, 1e-3);
}

TEST_F(PackedOps, ApproxSigmoidCases) {
  auto t = random_tensor(8, 8, 2, 9, 4.0);
  auto k = ActivationCoeffs::approx_sigmoid(-0.004, 0.01, 0.197, 0.5);
  auto want = reference::activation(t, k);
  EXPECT_EQ(dec_mock(approx_sigmoid(mock(), enc_mock(t), k)), want);
  auto x = enc_real(t);
  auto r = approx_sigmoid(real(), x, k);
  EXPECT_EQ(r.level(), x.level() - kApproxSigmoidCost);
  EXPECT_LE(max_abs_diff(dec_real(r), want), 1e-3);
  auto c = dec_real(approx_sigmoid(real(), x, ActivationCoeffs::approx_sigmoid(0, 0, 0, 0.5)));
  for (double v : c.data) EXPECT_NEAR(v, 0.5, 1e-3);
}

TEST_F(PackedOps, GlobalAveragePoolCases) {
  Tensor ramp(4, 4, 1);
  for (std::uint32_t i = 0; i < 16; ++i) ramp.data[i] = i + 1;
  auto p = global_avg_pool(real(), enc_real(ramp));
  EXPECT_TRUE(p.replicated);
  EXPECT_NEAR(dec_real(p).at(0, 0, 0), 8.5, 1e-4);
  ckks::CkksDecryptor dec(ctx_, keys_->secret_key);
  auto slots = dec.decrypt(p.channels[0]);
  for (std::uint32_t i = 0; i < 16; ++i) EXPECT_NEAR(slots[i], 8.5, 1e-4) << i;

  auto c7 = dec_real(global_avg_pool(real(), enc_real(Tensor(8, 8, 2, 7.0))));
  for (double v : c7.data) EXPECT_NEAR(v, 7.0, 1e-4);

  auto t = random_tensor(8, 8, 2, 12);
  EXPECT_EQ(dec_mock(global_avg_pool(mock(), enc_mock(t))), reference::global_avg_pool(t));
  // Strided map: only decimated slots count.
  auto w = random_conv(2, 2, 3, 2, 13);
  auto strided_want = reference::global_avg_pool(reference::conv2d(t, w));
  auto ms = global_avg_pool(mock(), conv2d(mock(), enc_mock(t), w));
  EXPECT_EQ(dec_mock(ms), strided_want);
  auto rs = global_avg_pool(real(), conv2d(real(), enc_real(t), w));
  EXPECT_LE(max_abs_diff(dec_real(rs), strided_want), 1e-3);
}

// Textbook SE: pool, fc1, act, fc2, gate, scale.
Tensor naive_se(const Tensor& x, const SeWeights& w) {
  std::vector<double> s(w.channels);
  for (std::uint32_t c = 0; c < w.channels; ++c) {
    double sum = 0;
    for (double v : x.channel(c)) sum += v;
    s[c] = sum / (x.height * x.width);
  }
  std::vector<double> a(w.hidden);
  for (std::uint32_t j = 0; j < w.hidden; ++j) {
    double z = w.fc1.bias[j];
    for (std::uint32_t c = 0; c < w.channels; ++c) z += w.fc1.w(j, c) * s[c];
    a[j] = w.act.a * z * z + w.act.b * z + w.act.c;
  }
  Tensor out = x;
  for (std::uint32_t c = 0; c < w.channels; ++c) {
    double z = w.fc2.bias[c];
    for (std::uint32_t j = 0; j < w.hidden; ++j) z += w.fc2.w(c, j) * a[j];
    const double g = w.gate.alpha * z * z * z + w.gate.beta * z * z + w.gate.gamma * z + w.gate.d;
    for (std::uint32_t h = 0; h < x.height; ++h)
      for (std::uint32_t k = 0; k < x.width; ++k) out.at(h, k, c) = x.at(h, k, c) * g;
  }
  return out;
}

TEST_F(PackedOps, SeBlockMatchesReferenceAndTextbookForm) {
  auto t = random_tensor(4, 4, 4, 30, 2.0);
  auto w = random_se(4, 2, 31);
  auto want = reference::se_block(t, w);
  EXPECT_LE(max_abs_diff(want, naive_se(t, w)), 1e-12);
  EXPECT_EQ(dec_mock(se_block(mock(), enc_mock(t), w)), want);
  auto x = enc_real(t);
  auto r = se_block(real(), x, w);
  EXPECT_EQ(r.level(), x.level() - kSeCost);
  EXPECT_LE(max_abs_diff(dec_real(r), want), 2e-3);
  EXPECT_LE(invalid_slot_max(r), 1e-3);

  auto unit = w;
  unit.gate = ActivationCoeffs::approx_sigmoid(0, 0, 0, 1);
  EXPECT_LE(max_abs_diff(dec_real(se_block(real(), x, unit)), t), 1e-3);
  EXPECT_LE(max_abs_diff(dec_real(se_block(real(), enc_real(Tensor(4, 4, 4)), w)), Tensor(4, 4, 4)), 1e-3);

  auto bad = w;
  bad.hidden = 3;
  EXPECT_THROW(se_block(mock(), enc_mock(t), bad), ShapeError);
}

TEST_F(PackedOps, ResidualAddAndLinear) {
  auto a = random_tensor(8, 8, 2, 40), b = random_tensor(8, 8, 2, 41);
  auto want = reference::residual_add(a, b);
  EXPECT_EQ(dec_mock(residual_add(mock(), enc_mock(a), enc_mock(b))), want);
  auto ra = enc_real(a);
  EXPECT_LE(max_abs_diff(dec_real(residual_add(real(), ra, enc_real(b))), want), 1e-4);
  EXPECT_LE(max_abs_diff(dec_real(residual_add(real(), ra, enc_real(Tensor(8, 8, 2)))), a), 1e-4);
  EXPECT_THROW(residual_add(mock(), enc_mock(a), enc_mock(Tensor(4, 4, 2))), ShapeError);

  auto lw = lhe::testing::random_linear(5, 2, 42);
  auto lwant = reference::linear(reference::global_avg_pool(a), lw);
  EXPECT_EQ(dec_mock(linear(mock(), global_avg_pool(mock(), enc_mock(a)), lw)), lwant);
  EXPECT_LE(max_abs_diff(dec_real(linear(real(), global_avg_pool(real(), ra), lw)), lwant), 1e-3);
  EXPECT_THROW(linear(mock(), enc_mock(a), lw), ShapeError);
}

TEST_F(PackedOps, DepthExhaustionRaises) {
  auto x = enc_mock(random_tensor(8, 8, 1, 50));
  auto k = ActivationCoeffs::polyact(0.1, 1, 0);
  for (int i = 0; i < 5; ++i) x = polyact(mock(), x, k);
  EXPECT_EQ(x.level(), 0);
  EXPECT_THROW(polyact(mock(), x, k), DepthError);
  EXPECT_THROW(conv2d(mock(), x, random_conv(1, 1, 3, 1, 1)), DepthError);
}

}  // namespace
}  // namespace lhe::tensor
