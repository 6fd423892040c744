// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "golden.h"
#include "json.hpp"
#include "lhe/ckks/serialize.h"
#include "lhe/common/error.h"
#include "lhe/metrics/metrics.h"
#include "lhe/model/resnet.h"
#include "lhe/runtime/runtime.h"
#include "test_util.h"

namespace lhe::runtime {
namespace {

using model::LayerKind;
using model::LayerSpec;
using testing::random_tensor;

// A secret-holding message that must never be framable for the server.
struct LeakyRequest {
  static constexpr MessageType kType = MessageType::kInferRequest;
  static constexpr Direction kDirection = Direction::kToServer;
  using Fields = std::tuple<std::string, std::vector<ckks::SecretKey>>;
  std::string fingerprint;
  std::vector<ckks::SecretKey> keys;
};

static_assert(ServerBoundMessage<ParamsHandshake>);
static_assert(ServerBoundMessage<InferRequest>);
static_assert(ServerBoundMessage<RefreshResponse>);
static_assert(ClientBoundMessage<RefreshRequest>);
static_assert(ClientBoundMessage<LogitsMessage>);
static_assert(!ServerBoundMessage<LeakyRequest>);
static_assert(!ClientBoundMessage<LeakyRequest>);
static_assert(holds_secret<std::tuple<int, std::optional<ckks::KeySet>>>::value);
static_assert(!holds_secret<ParamsHandshake::Fields>::value);
static_assert(!holds_secret<InferRequest::Fields>::value);
static_assert(!holds_secret<RefreshResponse::Fields>::value);

template <class S>
concept CanDecrypt = requires(const S& s, const LogitsMessage& m) { s.decrypt_logits(m); };
static_assert(CanDecrypt<ClientContext>);
static_assert(!CanDecrypt<ServerContext>);
static_assert(!std::is_constructible_v<ServerContext, ckks::KeySet, model::ModelGraph>);

// 8x8x2 input: conv, act, residual block, pool, linear. Cost 1+2+(1+2)+1+1 = 8.
model::ModelGraph small_graph(std::uint32_t classes = 3, std::uint64_t seed = 1) {
  model::ModelGraph g;
  g.input = {8, 8, 2};
  g.num_classes = classes;
  auto add = [&](LayerKind k, const std::string& name) -> LayerSpec& {
    LayerSpec l;
    l.kind = k;
    l.name = name;
    g.layers.push_back(l);
    return g.layers.back();
  };
  add(LayerKind::kConv, "c1").conv = testing::random_conv(3, 2, 3, 1, seed, 0.3);
  add(LayerKind::kPolyact, "a1").act = tensor::ActivationCoeffs::polyact(0.125, 0.5, 0.25);
  add(LayerKind::kResidualBegin, "b");
  add(LayerKind::kConv, "b.c").conv = testing::random_conv(3, 3, 3, 2, seed + 1, 0.3);
  add(LayerKind::kPolyact, "b.a").act = tensor::ActivationCoeffs::polyact(0.1, 0.7, 0.0);
  auto& end = add(LayerKind::kResidualEnd, "b.end");
  end.shortcut = model::Shortcut{testing::random_conv(3, 3, 1, 2, seed + 2, 0.3), std::nullopt};
  add(LayerKind::kGlobalAvgPool, "pool");
  add(LayerKind::kLinear, "fc").linear = testing::random_linear(classes, 3, seed + 3);
  return g;
}

class Runtime : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    params_ = new ckks::CkksParams(ckks::CkksParams::preset("test"));
    const auto planned = model::plan_levels(small_graph(), *params_);
    keys_ = new ckks::KeySet(ckks::keygen(*params_, model::required_rotation_steps(planned, *params_),
                                          seed_from_u64(41)));
  }
  static void TearDownTestSuite() {
    delete keys_;
    delete params_;
  }
  static ClientContext real_client(std::uint64_t seed = 5) {
    return ClientContext(*keys_, {8, 8, 2}, 3, seed_from_u64(seed));
  }

  static ckks::CkksParams* params_;
  static ckks::KeySet* keys_;
};
ckks::CkksParams* Runtime::params_ = nullptr;
ckks::KeySet* Runtime::keys_ = nullptr;

TEST_F(Runtime, MockInferenceEqualsPlaintextExactly) {
  const auto g = small_graph();
  ServerContext server = ServerContext::mock(*params_, g);
  EXPECT_FALSE(server.graph().refresh_points.empty());  // 8 levels of work on a 4-level chain
  ClientContext client = ClientContext::mock(*params_, {8, 8, 2}, 3, seed_from_u64(1));
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto x = random_tensor(8, 8, 2, 300 + s);
    const auto r = run_loopback(client, server, x);
    EXPECT_EQ(r.logits, model::plaintext_forward(g, x));
    EXPECT_EQ(r.trace.level_steps(), server.predicted_levels());
    EXPECT_EQ(r.trace.refresh_count, static_cast<int>(server.graph().refresh_points.size()));
  }
}

TEST_F(Runtime, RealInferenceWithinTolerance) {
  const auto g = small_graph();
  ClientContext client = real_client();
  ServerContext server(client.handshake(), g);
  const auto x = random_tensor(8, 8, 2, 77);
  const auto r = run_loopback(client, server, x);
  const auto want = model::plaintext_forward(g, x);
  ASSERT_EQ(r.logits.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(r.logits[i], want[i], 1e-2);
    EXPECT_NEAR(r.probabilities[i], sigmoid(want[i]), 1e-2);
  }
  EXPECT_EQ(r.trace.level_steps(), server.predicted_levels());
  EXPECT_GT(r.trace.bytes_transferred, 0u);
  // Per-layer deltas follow the cost table.
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& l = r.trace.layers[i];
    if (g.layers[i].kind == LayerKind::kResidualEnd) continue;
    EXPECT_EQ(l.level_before - l.level_after, model::layer_cost(server.graph().layers[i])) << l.name;
  }
  const auto j = nlohmann::json::parse(r.trace.to_json());
  EXPECT_EQ(j.at("layers").size(), g.layers.size());
  EXPECT_EQ(j.at("refresh_count"), r.trace.refresh_count);
}

TEST_F(Runtime, RefreshIsTransparentOnMock) {
  const auto g = small_graph();
  const auto x = random_tensor(8, 8, 2, 5);
  auto deep = *params_;
  deep.modulus_bits.assign(9, 40);
  deep.modulus_bits[0] = 60;
  ServerContext no_refresh = ServerContext::mock(deep, g);
  ServerContext with_refresh = ServerContext::mock(*params_, g);
  ASSERT_TRUE(no_refresh.graph().refresh_points.empty());
  ClientContext c1 = ClientContext::mock(deep, {8, 8, 2}, 3, seed_from_u64(1));
  ClientContext c2 = ClientContext::mock(*params_, {8, 8, 2}, 3, seed_from_u64(1));
  EXPECT_EQ(run_loopback(c1, no_refresh, x).logits, run_loopback(c2, with_refresh, x).logits);
}

TEST_F(Runtime, ClientEncryptChecks) {
  ClientContext client = real_client();
  const auto req = client.encrypt(random_tensor(8, 8, 2, 1));
  EXPECT_EQ(req.input.channels.size(), 2u);
  EXPECT_EQ(req.fingerprint, ckks::params_fingerprint(*params_));
  EXPECT_THROW(client.encrypt(random_tensor(8, 8, 3, 1)), ShapeError);
  EXPECT_THROW(client.encrypt(random_tensor(4, 8, 2, 1)), ShapeError);
  // Re-parsed request serializes to the same bytes.
  const auto bytes = frame(req);
  EXPECT_EQ(frame(parse_as<InferRequest>(bytes)), bytes);
}

TEST_F(Runtime, ServerRejectsForeignRequests) {
  ClientContext client = real_client();
  ServerContext server(client.handshake(), small_graph());
  auto req = client.encrypt(random_tensor(8, 8, 2, 1));
  auto bad = req;
  bad.fingerprint = std::string(64, '0');
  EXPECT_THROW(server_infer(server, bad, {}), ParamError);
  auto wrong_shape = req;
  wrong_shape.input.channels.pop_back();
  EXPECT_THROW(server_infer(server, wrong_shape, {}), ShapeError);
  auto handshake = client.handshake();
  handshake.fingerprint = std::string(64, 'f');
  EXPECT_THROW(ServerContext(handshake, small_graph()), ParamError);
}

TEST_F(Runtime, OracleFailurePropagates) {
  ClientContext client = real_client();
  ServerContext server(client.handshake(), small_graph());
  const auto req = client.encrypt(random_tensor(8, 8, 2, 1));
  struct OracleDown : std::runtime_error {
    using std::runtime_error::runtime_error;
  };
  EXPECT_THROW(server_infer(server, req, [](const RefreshRequest&) -> RefreshResponse { throw OracleDown("down"); }),
               OracleDown);
  // A response that is not at the top level is refused.
  EXPECT_THROW(server_infer(server, req,
                            [&](const RefreshRequest& r) {
                              return RefreshResponse{r.layer, r.tensor};
                            }),
               DepthError);
}

TEST_F(Runtime, UnplannedGraphRaisesDepthError) {
  const auto g = model::fold_batchnorm(small_graph());  // no refresh points
  ClientContext client = real_client();
  const auto req = client.encrypt(random_tensor(8, 8, 2, 1));
  ckks::CkksEvaluator ev(ckks::CkksContext::create(*params_), std::make_shared<const ckks::EvaluationKeys>(keys_->eval));
  EXPECT_THROW(server_infer_graph(ev, g, req.input, {}), DepthError);
}

TEST_F(Runtime, FinalizeAppliesExactSigmoid) {
  auto g = small_graph();
  auto& fc = g.layers.back().linear;
  std::fill(fc.weights.begin(), fc.weights.end(), 0.0);
  fc.bias = {0.0, -50.0, 50.0};
  ClientContext client = real_client();
  ServerContext server(client.handshake(), g);
  const auto r = run_loopback(client, server, random_tensor(8, 8, 2, 1));
  EXPECT_NEAR(r.probabilities[0], 0.5, 1e-3);
  EXPECT_LT(r.probabilities[1], 1e-15);
  EXPECT_GT(r.probabilities[2], 1.0 - 1e-15);
  for (double p : r.probabilities) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST_F(Runtime, FramesRoundTrip) {
  ClientContext client = real_client();
  const auto hs = client.handshake();
  const auto hs_bytes = frame(hs);
  const auto back = parse_as<ParamsHandshake>(hs_bytes);
  EXPECT_EQ(back.keys, hs.keys);
  EXPECT_EQ(back.fingerprint, hs.fingerprint);
  EXPECT_EQ(hs_bytes[4], static_cast<std::uint8_t>(MessageType::kParamsHandshake));

  const auto req = client.encrypt(random_tensor(8, 8, 2, 1));
  RefreshRequest rr{7, req.input};
  const auto rr_bytes = frame(rr);
  EXPECT_EQ(frame(parse_as<RefreshRequest>(rr_bytes)), rr_bytes);
  EXPECT_THROW(parse_as<LogitsMessage>(rr_bytes), FormatError);

  auto truncated = rr_bytes;
  truncated.pop_back();
  EXPECT_THROW(parse_frame(truncated), FormatError);
  auto bad_type = rr_bytes;
  bad_type[4] = 9;
  EXPECT_THROW(parse_frame(bad_type), FormatError);
}

bool contains(const std::vector<std::uint8_t>& hay, std::span<const std::uint8_t> needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

TEST_F(Runtime, ServerBoundGoldenFramesCarryNoSecret) {
  // Small deterministic session: no rotation keys, one-channel input.
  const auto keys = ckks::keygen(*params_, {}, seed_from_u64(3));
  ClientContext client(keys, {4, 4, 1}, 2, seed_from_u64(4));
  const auto hs = frame(client.handshake());
  const auto req = frame(client.encrypt(random_tensor(4, 4, 1, 9)));
  testing::expect_golden("handshake_test.frame", hs);
  testing::expect_golden("infer_request_test.frame", req);

  const auto& s = keys.secret_key.s;
  for (std::size_t t = 0; t < s.limbs(); ++t) {
    const auto limb = s.limb(t);
    const std::span<const std::uint8_t> window(reinterpret_cast<const std::uint8_t*>(limb.data()), 64);
    EXPECT_FALSE(contains(hs, window));
    EXPECT_FALSE(contains(req, window));
  }
  const auto secret_file = ckks::serialize(*params_, keys.secret_key);
  const std::span<const std::uint8_t> tail(secret_file.data() + secret_file.size() - 64, 64);
  EXPECT_FALSE(contains(hs, tail));
}

TEST_F(Runtime, MockPipelineF1EqualsPlaintextF1) {
  const auto g = small_graph();
  ServerContext server = ServerContext::mock(*params_, g);
  ClientContext client = ClientContext::mock(*params_, {8, 8, 2}, 3, seed_from_u64(1));
  metrics::ScoreMatrix enc, plain;
  enc.classes = plain.classes = 3;
  std::mt19937_64 rng(8);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto x = random_tensor(8, 8, 2, 900 + s, 2.0);
    const auto probs = run_loopback(client, server, x).probabilities;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto label = static_cast<std::uint8_t>(rng() % 2);
      enc.scores.push_back(probs[c]);
      plain.scores.push_back(sigmoid(model::plaintext_forward(g, x)[c]));
      enc.labels.push_back(label);
      plain.labels.push_back(label);
    }
    ++enc.samples;
    ++plain.samples;
  }
  for (auto a : {metrics::Averaging::kMicro, metrics::Averaging::kMacro, metrics::Averaging::kWeighted}) {
    EXPECT_EQ(metrics::f1(enc, a), metrics::f1(plain, a));
  }
}

TEST(RuntimeSigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0), 1.0 / (1.0 + std::exp(-2.0)), 0);
}

}  // namespace
}  // namespace lhe::runtime
