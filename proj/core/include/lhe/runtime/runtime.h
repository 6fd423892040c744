// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lhe/ckks/evaluator.h"
#include "lhe/model/graph.h"
#include "lhe/runtime/messages.h"

namespace lhe::runtime {

using model::Geometry;
using model::ModelGraph;
using tensor::Tensor;

// Holds the secret key. Real clients carry a full key set; mock clients carry
// none (the mock backend has no keys).
class ClientContext {
 public:
  ClientContext(ckks::KeySet keys, Geometry input, std::uint32_t num_classes, const Seed& seed);
  static ClientContext mock(const ckks::CkksParams& params, Geometry input, std::uint32_t num_classes,
                            const Seed& seed);

  const ckks::CkksParams& params() const { return ctx_->params(); }
  ckks::Backend backend() const { return backend_; }
  const std::string& fingerprint() const { return fingerprint_; }
  Geometry input() const { return input_; }
  std::uint32_t num_classes() const { return num_classes_; }

  // Throws KeyError for a mock client (nothing to hand over).
  ParamsHandshake handshake() const;
  // client_encrypt: ShapeError on geometry mismatch.
  InferRequest encrypt(const Tensor& latent);
  // Decrypts, clears every slot outside the tensor's valid set, re-encrypts
  // at the top level with the default scale.
  RefreshResponse refresh(const RefreshRequest& request);
  // Decrypted logits (no sigmoid).
  std::vector<double> decrypt_logits(const LogitsMessage& message) const;
  // client_finalize: exact sigmoid of the decrypted logits.
  std::vector<double> finalize(const LogitsMessage& message) const;

 private:
  ClientContext(std::shared_ptr<const ckks::CkksContext> ctx, ckks::KeySet* keys, Geometry input, std::uint32_t num_classes, const Seed& seed);
  void check_message(const PackedTensor& t) const;

  std::shared_ptr<const ckks::CkksContext> ctx_;
  ckks::Backend backend_;
  std::optional<ckks::KeySet> keys_;
  std::unique_ptr<ckks::Encryptor> encryptor_;
  std::unique_ptr<ckks::Decryptor> decryptor_;
  Geometry input_;
  std::uint32_t num_classes_;
  std::string fingerprint_;
  Prng prng_;
};

// Evaluation keys and a planned, folded graph. Read-only after construction:
// one ServerContext can serve concurrent sessions. Exposes no decryption.
class ServerContext {
 public:
  // Folds batch norm if present and plans refresh points for the params.
  // Throws PlanError if the graph cannot be planned, KeyError if some
  // required rotation cannot be composed from the keys.
  ServerContext(const ParamsHandshake& handshake, const ModelGraph& graph);
  static ServerContext mock(const ckks::CkksParams& params, const ModelGraph& graph);

  const ckks::CkksParams& params() const { return evaluator_->context().params(); }
  const std::string& fingerprint() const { return fingerprint_; }
  const ModelGraph& graph() const { return graph_; }
  const ckks::Evaluator& evaluator() const { return *evaluator_; }
  std::vector<model::LevelStep> predicted_levels() const { return model::predict_levels(graph_, params()); }

 private:
  ServerContext(std::shared_ptr<const ckks::Evaluator> ev, const ModelGraph& graph);

  std::shared_ptr<const ckks::Evaluator> evaluator_;
  ModelGraph graph_;
  std::string fingerprint_;
};

struct LayerTrace {
  std::string name;
  std::string kind;
  double seconds = 0;
  int level_before = 0, level_after = 0;
  bool refreshed_before = false;
};

struct InferenceTrace {
  std::vector<LayerTrace> layers;
  int refresh_count = 0;
  std::uint64_t bytes_transferred = 0;  // framed bytes, both directions
  double total_seconds = 0;

  std::vector<model::LevelStep> level_steps() const;
  std::string to_json() const;
};

using RefreshOracle = std::function<RefreshResponse(const RefreshRequest&)>;

struct InferResult {
  LogitsMessage logits;
  InferenceTrace trace;
};

// Runs the planned graph. Throws ParamError on a fingerprint mismatch,
// ShapeError on a request that does not match the model input, DepthError if
// levels run out (only possible on an unplanned graph). Oracle errors
// propagate unchanged.
InferResult server_infer(const ServerContext& server, const InferRequest& request, const RefreshOracle& oracle);
// Same without planned refreshes: executes `graph` as given.
InferResult server_infer_graph(const ckks::Evaluator& ev, const ModelGraph& graph, const PackedTensor& input,
                               const RefreshOracle& oracle);

// Client and server talking through framed bytes in one process.
struct LoopbackResult {
  std::vector<double> logits;
  std::vector<double> probabilities;
  InferenceTrace trace;
};
LoopbackResult run_loopback(ClientContext& client, const ServerContext& server, const Tensor& latent);

// Encryption with public material only. The mock variant needs no keys.
InferRequest encrypt_public(const ckks::EvaluationKeys& keys, const Tensor& latent, const Seed& seed);
InferRequest encrypt_mock(const ckks::CkksParams& params, const Tensor& latent, const Seed& seed);

// Decrypts logits with a bare secret key, or without one for mock logits,
// and applies the exact sigmoid. ParamError if the logits do not belong to
// `params` or to the key's backend.
std::vector<double> finalize_logits(const ckks::CkksParams& params, const ckks::SecretKey* secret,
                                    const LogitsMessage& message);

double sigmoid(double x);

}  // namespace lhe::runtime
