// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/runtime/runtime.h"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "lhe/ckks/serialize.h"
#include "lhe/common/error.h"

namespace lhe::runtime {
namespace {

using Clock = std::chrono::steady_clock;

std::string geometry_text(std::uint32_t h, std::uint32_t w, std::uint32_t c) {
  return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

bool has_batchnorm(const ModelGraph& g) {
  for (const auto& l : g.layers) {
    if (l.kind == model::LayerKind::kBatchNorm) return true;
    if (l.shortcut && l.shortcut->bn) return true;
  }
  return false;
}

ModelGraph prepare(const ModelGraph& g, const ckks::CkksParams& params) {
  return model::plan_levels(has_batchnorm(g) ? model::fold_batchnorm(g) : g, params);
}

std::vector<std::uint32_t> spans_for(const ModelGraph& g) {
  std::vector<std::uint32_t> spans(g.layers.size(), 0);
  for (std::size_t i = 0; i < g.layers.size(); ++i)
    if (g.layers[i].kind == model::LayerKind::kGlobalAvgPool) spans[i] = model::pool_span(g);
  return spans;
}

void check_refreshed(const RefreshResponse& r, std::uint32_t layer, const PackedTensor& sent, int top) {
  if (r.layer != layer) throw Error("refresh response for layer " + std::to_string(r.layer) + ", expected " + std::to_string(layer));
  const auto& t = r.tensor;
  if (t.channels.size() != sent.channels.size() || t.height != sent.height || t.width != sent.width ||
      t.stride_phase != sent.stride_phase || t.replicated != sent.replicated || t.span != sent.span) {
    throw ShapeError("refresh response does not match the refreshed tensor's shape");
  }
  t.check_consistent();
  if (t.level() != top) throw DepthError("refresh response is not at the top level");
}

InferResult execute(const ckks::Evaluator& ev, const ModelGraph& g, const std::vector<std::uint32_t>& spans,
                    PackedTensor x, const RefreshOracle& oracle) {
  using model::LayerKind;
  namespace t = tensor;
  const int top = ev.context().params().max_level();
  const std::set<std::size_t> refresh(g.refresh_points.begin(), g.refresh_points.end());
  InferResult result;
  auto& trace = result.trace;
  const auto start = Clock::now();
  std::optional<PackedTensor> skip;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    LayerTrace lt;
    lt.name = l.name;
    lt.kind = model::kind_name(l.kind);
    const auto t0 = Clock::now();
    if (refresh.contains(i)) {
      if (!oracle) throw Error("graph has refresh points but no refresh oracle was supplied");
      if (skip) throw PlanError("refresh point inside a residual block at layer '" + l.name + "'");
      RefreshRequest req{static_cast<std::uint32_t>(i), std::move(x)};
      trace.bytes_transferred += frame(req).size();
      RefreshResponse resp = oracle(req);
      trace.bytes_transferred += frame(resp).size();
      check_refreshed(resp, req.layer, req.tensor, top);
      x = std::move(resp.tensor);
      lt.refreshed_before = true;
      ++trace.refresh_count;
    }
    lt.level_before = x.level();
    switch (l.kind) {
      case LayerKind::kConv:
        x = t::conv2d(ev, x, l.conv);
        break;
      case LayerKind::kPolyact:
        x = t::polyact(ev, x, l.act);
        break;
      case LayerKind::kApproxSigmoid:
        x = t::approx_sigmoid(ev, x, l.act);
        break;
      case LayerKind::kGlobalAvgPool:
        x = t::global_avg_pool(ev, x, spans[i]);
        break;
      case LayerKind::kLinear:
        x = t::linear(ev, x, l.linear);
        break;
      case LayerKind::kSe:
        x = t::se_block(ev, x, l.se);
        break;
      case LayerKind::kResidualBegin:
        skip = x;
        break;
      case LayerKind::kResidualEnd: {
        if (!skip) throw ShapeError("residual_end '" + l.name + "' without a matching begin");
        PackedTensor k = std::move(*skip);
        skip.reset();
        if (l.shortcut) {
          if (l.shortcut->bn) throw FoldError("shortcut batch norm at '" + l.name + "' was not folded");
          k = t::conv2d(ev, k, l.shortcut->conv);
        }
        x = t::residual_add(ev, x, k);
        break;
      }
      case LayerKind::kBatchNorm:
        throw FoldError("batch norm layer '" + l.name + "' must be folded before encrypted execution");
    }
    lt.level_after = x.level();
    lt.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    trace.layers.push_back(std::move(lt));
  }
  trace.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.logits.num_classes = g.num_classes;
  result.logits.logits = std::move(x);
  trace.bytes_transferred += frame(result.logits).size();
  return result;
}

void check_input(const ModelGraph& g, const PackedTensor& x) {
  const auto& in = g.input;
  if (x.height != in.height || x.width != in.width || x.channels.size() != in.channels || x.stride_phase != 1 ||
      x.replicated) {
    throw ShapeError("request tensor " + geometry_text(x.height, x.width, static_cast<std::uint32_t>(x.channels.size())) +
                     " does not match model input " + geometry_text(in.height, in.width, in.channels));
  }
  x.check_consistent();
}

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---- client ----

ClientContext::ClientContext(std::shared_ptr<const ckks::CkksContext> ctx, ckks::KeySet* keys, Geometry input,
                             std::uint32_t num_classes, const Seed& seed)
    : ctx_(std::move(ctx)),
      backend_(keys ? ckks::Backend::kReal : ckks::Backend::kMock),
      keys_(keys ? std::optional<ckks::KeySet>(std::move(*keys)) : std::nullopt),
      input_(input),
      num_classes_(num_classes),
      fingerprint_(ckks::params_fingerprint(ctx_->params())),
      prng_(seed) {
  if (keys_) {
    encryptor_ = std::make_unique<ckks::CkksEncryptor>(ctx_, keys_->eval.public_key);
    decryptor_ = std::make_unique<ckks::CkksDecryptor>(ctx_, keys_->secret_key);
  } else {
    encryptor_ = std::make_unique<ckks::MockEncryptor>(ctx_);
    decryptor_ = std::make_unique<ckks::MockDecryptor>();
  }
}

ClientContext::ClientContext(ckks::KeySet keys, Geometry input, std::uint32_t num_classes, const Seed& seed)
    : ClientContext(ckks::CkksContext::create(keys.eval.params), &keys, input, num_classes, seed) {}

ClientContext ClientContext::mock(const ckks::CkksParams& params, Geometry input, std::uint32_t num_classes,
                                  const Seed& seed) {
  return ClientContext(ckks::CkksContext::create(params), nullptr, input, num_classes, seed);
}

ParamsHandshake ClientContext::handshake() const {
  if (!keys_) throw KeyError("mock client has no evaluation keys");
  return ParamsHandshake{fingerprint_, keys_->eval};
}

InferRequest ClientContext::encrypt(const Tensor& latent) {
  if (latent.height != input_.height || latent.width != input_.width || latent.channels != input_.channels) {
    throw ShapeError("latent " + geometry_text(latent.height, latent.width, latent.channels) +
                     " does not match model input " + geometry_text(input_.height, input_.width, input_.channels));
  }
  return InferRequest{fingerprint_, tensor::pack(latent, *encryptor_, prng_)};
}

void ClientContext::check_message(const PackedTensor& t) const {
  for (const auto& ct : t.channels) {
    if (ct.backend != backend_) throw ParamError("ciphertext backend does not match the client");
    if (ct.level < 0 || ct.level > params().max_level()) throw ParamError("ciphertext level outside the client's chain");
  }
}

RefreshResponse ClientContext::refresh(const RefreshRequest& request) {
  const auto& in = request.tensor;
  check_message(in);
  const std::uint32_t slots = params().slot_count();
  std::vector<double> mask;
  if (in.replicated) {
    mask.assign(slots, 0.0);
    std::fill(mask.begin(), mask.begin() + std::min(in.span, slots), 1.0);
  } else {
    mask = tensor::valid_mask(in.height, in.width, in.stride_phase, slots);
  }
  RefreshResponse out;
  out.layer = request.layer;
  out.tensor = in;
  for (auto& ct : out.tensor.channels) {
    auto values = decryptor_->decrypt(ct);
    for (std::size_t s = 0; s < values.size(); ++s) values[s] *= mask[s];
    ct = encryptor_->encrypt(values, prng_);
  }
  return out;
}

std::vector<double> ClientContext::decrypt_logits(const LogitsMessage& message) const {
  check_message(message.logits);
  if (message.num_classes != num_classes_) {
    throw ShapeError("logits carry " + std::to_string(message.num_classes) + " classes, expected " +
                     std::to_string(num_classes_));
  }
  if (message.logits.channels.size() != 1) throw ShapeError("logits must be a single ciphertext");
  const auto values = decryptor_->decrypt(message.logits.channels.front());
  return {values.begin(), values.begin() + num_classes_};
}

std::vector<double> ClientContext::finalize(const LogitsMessage& message) const {
  auto p = decrypt_logits(message);
  for (auto& v : p) v = sigmoid(v);
  return p;
}

// ---- server ----

ServerContext::ServerContext(std::shared_ptr<const ckks::Evaluator> ev, const ModelGraph& graph)
    : evaluator_(std::move(ev)),
      graph_(prepare(graph, evaluator_->context().params())),
      fingerprint_(ckks::params_fingerprint(evaluator_->context().params())) {
  if (const auto* real = dynamic_cast<const ckks::CkksEvaluator*>(evaluator_.get())) {
    for (int step : model::required_rotation_steps(graph_, params())) real->compose_steps(step);
  }
}

namespace {
std::shared_ptr<const ckks::Evaluator> real_evaluator(const ParamsHandshake& h) {
  if (h.fingerprint != ckks::params_fingerprint(h.keys.params)) {
    throw ParamError("handshake fingerprint does not match its parameters");
  }
  auto ctx = ckks::CkksContext::create(h.keys.params);
  return std::make_shared<const ckks::CkksEvaluator>(ctx, std::make_shared<const ckks::EvaluationKeys>(h.keys));
}
}  // namespace

ServerContext::ServerContext(const ParamsHandshake& handshake, const ModelGraph& graph)
    : ServerContext(real_evaluator(handshake), graph) {}

ServerContext ServerContext::mock(const ckks::CkksParams& params, const ModelGraph& graph) {
  return ServerContext(std::make_shared<const ckks::MockEvaluator>(ckks::CkksContext::create(params)), graph);
}

InferResult server_infer(const ServerContext& server, const InferRequest& request, const RefreshOracle& oracle) {
  if (request.fingerprint != server.fingerprint()) {
    throw ParamError("request params fingerprint " + request.fingerprint.substr(0, 16) +
                     "... does not match server params " + server.fingerprint().substr(0, 16) + "...");
  }
  check_input(server.graph(), request.input);
  for (const auto& ct : request.input.channels) {
    if (ct.backend != server.evaluator().backend()) throw ParamError("request backend does not match the server");
  }
  InferResult r = execute(server.evaluator(), server.graph(), spans_for(server.graph()), request.input, oracle);
  r.trace.bytes_transferred += frame(request).size();
  return r;
}

InferResult server_infer_graph(const ckks::Evaluator& ev, const ModelGraph& graph, const PackedTensor& input,
                               const RefreshOracle& oracle) {
  graph.validate();
  check_input(graph, input);
  return execute(ev, graph, spans_for(graph), input, oracle);
}

std::vector<model::LevelStep> InferenceTrace::level_steps() const {
  std::vector<model::LevelStep> out;
  for (const auto& l : layers) out.push_back({l.level_before, l.level_after});
  return out;
}

std::string InferenceTrace::to_json() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& l : layers) {
    layers_json.push_back({{"name", l.name},
                           {"kind", l.kind},
                           {"seconds", l.seconds},
                           {"level_before", l.level_before},
                           {"level_after", l.level_after},
                           {"refreshed_before", l.refreshed_before}});
  }
  nlohmann::json j = {{"layers", layers_json},
                      {"refresh_count", refresh_count},
                      {"bytes_transferred", bytes_transferred},
                      {"total_seconds", total_seconds}};
  return j.dump(2);
}

LoopbackResult run_loopback(ClientContext& client, const ServerContext& server, const Tensor& latent) {
  // Every message crosses the boundary as framed bytes.
  const auto request_bytes = frame(client.encrypt(latent));
  const auto request = parse_as<InferRequest>(request_bytes);
  auto oracle = [&client](const RefreshRequest& req) {
    const auto to_client = frame(req);
    const auto response = client.refresh(parse_as<RefreshRequest>(to_client));
    return parse_as<RefreshResponse>(frame(response));
  };
  auto result = server_infer(server, request, oracle);
  const auto logits = parse_as<LogitsMessage>(frame(result.logits));
  LoopbackResult out;
  out.logits = client.decrypt_logits(logits);
  out.probabilities = client.finalize(logits);
  out.trace = std::move(result.trace);
  return out;
}

InferRequest encrypt_public(const ckks::EvaluationKeys& keys, const Tensor& latent, const Seed& seed) {
  auto ctx = ckks::CkksContext::create(keys.params);
  const ckks::CkksEncryptor enc(ctx, keys.public_key);
  Prng prng(seed);
  return InferRequest{ckks::params_fingerprint(keys.params), tensor::pack(latent, enc, prng)};
}

InferRequest encrypt_mock(const ckks::CkksParams& params, const Tensor& latent, const Seed& seed) {
  auto client = ClientContext::mock(params, {latent.height, latent.width, latent.channels}, 1, seed);
  return client.encrypt(latent);
}

std::vector<double> finalize_logits(const ckks::CkksParams& params, const ckks::SecretKey* secret,
                                    const LogitsMessage& message) {
  if (message.logits.channels.size() != 1) throw ShapeError("logits must be a single ciphertext");
  const auto& ct = message.logits.channels.front();
  const auto backend = secret ? ckks::Backend::kReal : ckks::Backend::kMock;
  if (ct.backend != backend) throw ParamError("logits backend does not match the key");
  if (ct.level < 0 || ct.level > params.max_level()) throw ParamError("logits level outside the key's chain");
  if (backend == ckks::Backend::kReal) {
    for (const auto& poly : ct.polys) {
      if (poly.n() != params.ring_degree || poly.limbs() != static_cast<std::size_t>(ct.level) + 1) {
        throw ParamError("logits ring does not match the key");
      }
    }
  }
  if (message.num_classes == 0 || message.num_classes > params.slot_count()) {
    throw ShapeError("logits class count " + std::to_string(message.num_classes) + " is out of range");
  }
  std::vector<double> values;
  if (secret) {
    values = ckks::CkksDecryptor(ckks::CkksContext::create(params), *secret).decrypt(ct);
  } else {
    values = ckks::MockDecryptor().decrypt(ct);
  }
  if (values.size() < message.num_classes) throw ShapeError("logits ciphertext has too few slots");
  std::vector<double> p(values.begin(), values.begin() + message.num_classes);
  for (auto& v : p) v = sigmoid(v);
  return p;
}

}  // namespace lhe::runtime
