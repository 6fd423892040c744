// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lhe/ckks/keys.h"
#include "lhe/ckks/serialize.h"
#include "lhe/common/bytes.h"
#include "lhe/common/error.h"
#include "lhe/metrics/metrics.h"
#include "lhe/model/bundle.h"
#include "lhe/model/resnet.h"
#include "lhe/runtime/benchmark.h"
#include "lhe/runtime/runtime.h"
#include "lhe/tensor/tensor.h"

namespace {

using namespace lhe;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDepth = 3;
constexpr int kExitIo = 4;

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

// Keys, params or a secret as read from disk; the header decides which.
struct KeyFile {
  ckks::ObjectKind kind;
  ckks::CkksParams params;
  std::optional<ckks::EvaluationKeys> eval;
  std::optional<ckks::SecretKey> secret;
};

KeyFile read_key_file(const std::string& path) {
  const auto bytes = read_file(path);
  KeyFile k{ckks::object_kind(bytes), {}, {}, {}};
  switch (k.kind) {
    case ckks::ObjectKind::kParams:
      k.params = ckks::deserialize_params(bytes);
      break;
    case ckks::ObjectKind::kEvaluationKeys:
      k.eval = ckks::deserialize_evaluation_keys(bytes);
      k.params = k.eval->params;
      break;
    case ckks::ObjectKind::kKeySet: {
      auto ks = ckks::deserialize_key_set(bytes);
      k.params = ks.eval.params;
      k.secret = std::move(ks.secret_key);
      k.eval = std::move(ks.eval);
      break;
    }
    case ckks::ObjectKind::kSecretKey: {
      auto [params, sk] = ckks::deserialize_secret_key(bytes);
      k.params = params;
      k.secret = std::move(sk);
      break;
    }
    default:
      throw FormatError(path + " holds a ciphertext, not key material");
  }
  return k;
}

Seed seed_arg(std::uint64_t seed) {
  if (seed != 0) return seed_from_u64(seed);
  return random_seed();
}

int cmd_keygen(const std::string& preset, const std::string& out, const std::string& model_path, bool mock,
               std::uint64_t seed) {
  const auto params = ckks::CkksParams::preset(preset);
  std::set<int> steps;
  if (model_path.empty()) {
    steps = ckks::power_of_two_steps(params.slot_count());
  } else {
    const auto planned = model::plan_levels(model::load_weights(model_path), params);
    steps = model::required_rotation_steps(planned, params);
  }
  ensure_dir(out);
  const fs::path dir(out);
  write_file((dir / "params.ckks").string(), ckks::serialize(params));
  if (mock) {
    std::cout << "wrote " << (dir / "params.ckks").string() << " (mock backend, no keys)\n";
    return kExitOk;
  }
  const auto keys = ckks::keygen(params, steps, seed_arg(seed));
  write_file((dir / "public.ckks").string(), ckks::serialize(keys.eval));
  write_file((dir / "secret.ckks").string(), ckks::serialize(keys));
  std::cout << "preset " << preset << ": N=" << params.ring_degree << ", levels=" << params.max_level()
            << ", rotation keys=" << steps.size() << "\n";
  std::cout << "wrote params.ckks, public.ckks, secret.ckks to " << out << "\n";
  return kExitOk;
}

int cmd_encrypt(const std::string& pub, const std::string& latent_path, const std::string& out, std::uint64_t seed) {
  const auto key = read_key_file(pub);
  if (key.kind == ckks::ObjectKind::kSecretKey) throw KeyError(pub + " holds no public key");
  const auto latent = tensor::load_latent(latent_path);
  const auto request = key.eval ? runtime::encrypt_public(*key.eval, latent, seed_arg(seed))
                                : runtime::encrypt_mock(key.params, latent, seed_arg(seed));
  const auto bytes = runtime::frame(request);
  write_file(out, bytes);
  std::cout << "encrypted " << latent.height << "x" << latent.width << "x" << latent.channels << " into "
            << request.input.channels.size() << " ciphertexts (" << bytes.size() << " bytes)\n";
  return kExitOk;
}

int cmd_infer(const std::string& model_path, const std::string& request_path, const std::string& keys_path,
              const std::string& out, bool mock, const std::string& trace_path, const std::string& secret_path) {
  const auto graph = model::load_weights(model_path);
  const auto key = read_key_file(keys_path);
  const auto request = runtime::parse_as<runtime::InferRequest>(read_file(request_path));

  std::optional<runtime::ServerContext> server;
  std::optional<runtime::ClientContext> refresher;
  if (mock) {
    server.emplace(runtime::ServerContext::mock(key.params, graph));
    refresher.emplace(runtime::ClientContext::mock(key.params, graph.input, graph.num_classes, random_seed()));
  } else {
    if (!key.eval) throw KeyError(keys_path + " holds no evaluation keys (use --mock for a params-only file)");
    ckks::EvaluationKeys eval = *key.eval;
    server.emplace(runtime::ParamsHandshake{ckks::params_fingerprint(eval.params), std::move(eval)}, graph);
    if (!secret_path.empty()) {
      auto secret = read_key_file(secret_path);
      if (secret.kind != ckks::ObjectKind::kKeySet) throw KeyError(secret_path + " is not a full key set");
      refresher.emplace(ckks::KeySet{std::move(*secret.secret), std::move(*secret.eval)}, graph.input,
                        graph.num_classes, random_seed());
    }
  }
  const auto& refreshes = server->graph().refresh_points;
  if (!refresher && !refreshes.empty()) {
    throw PlanError("model needs " + std::to_string(refreshes.size()) +
                    " refresh round trips at these params; pass --secret to serve them in-process");
  }
  runtime::RefreshOracle oracle = [&](const runtime::RefreshRequest& r) { return refresher->refresh(r); };
  const auto result = runtime::server_infer(*server, request, oracle);
  write_file(out, runtime::frame(result.logits));
  if (!trace_path.empty()) write_text(trace_path, result.trace.to_json());
  std::cout << "layers=" << result.trace.layers.size() << " refreshes=" << result.trace.refresh_count
            << " bytes=" << result.trace.bytes_transferred << " seconds=" << result.trace.total_seconds << "\n";
  return kExitOk;
}

int cmd_finalize(const std::string& secret_path, const std::string& logits_path) {
  const auto key = read_key_file(secret_path);
  const auto logits = runtime::parse_as<runtime::LogitsMessage>(read_file(logits_path));
  const ckks::SecretKey* sk = key.secret ? &*key.secret : nullptr;
  const auto p = runtime::finalize_logits(key.params, sk, logits);
  for (std::size_t i = 0; i < p.size(); ++i) std::printf("class %zu\t%.6f\n", i, p[i]);
  return kExitOk;
}

int cmd_bench(const std::string& model_arg, const std::string& geometries, int reps, bool mock,
              const std::string& json_path) {
  std::function<model::ModelGraph(model::Geometry)> make;
  std::vector<model::Geometry> geos =
      geometries.empty() ? runtime::standard_geometries() : runtime::parse_geometries(geometries);
  if (model_arg == "sweep") {
    make = runtime::sweep_graph;
  } else if (model_arg == "resnet20-latent") {
    make = [](model::Geometry g) {
      model::ResNetOptions o;
      o.input = g;
      return model::build_resnet20_latent(o);
    };
  } else {
    auto graph = model::load_weights(model_arg);
    if (geometries.empty()) geos = {graph.input};
    make = [graph](model::Geometry g) {
      if (!(g == graph.input)) throw ShapeError("bundle input does not match the requested geometry");
      return graph;
    };
  }
  runtime::BenchmarkOptions opts;
  opts.repetitions = reps;
  opts.backend = mock ? ckks::Backend::kMock : ckks::Backend::kReal;
  const auto report = runtime::benchmark(make, geos, opts);
  for (const auto& p : report.points) {
    std::printf("%ux%ux%u\tN=%u\tlevels=%d\tmedian=%.3f ms\n", p.geometry.height, p.geometry.width,
                p.geometry.channels, p.ring_degree, p.levels, p.median_seconds * 1e3);
  }
  std::printf("strictly decreasing: %s\n", report.strictly_decreasing() ? "yes" : "no");
  if (!json_path.empty()) write_text(json_path, report.to_json());
  return kExitOk;
}

int cmd_eval(const std::string& scores, const std::string& labels, double threshold, const std::string& out) {
  const auto sm = metrics::make_score_matrix(metrics::read_csv(scores), metrics::read_csv(labels));
  const auto json = metrics::evaluate(sm, threshold).to_json();
  if (!out.empty()) write_text(out, json);
  std::cout << json << "\n";
  return kExitOk;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const DepthError*>(&e) || dynamic_cast<const PlanError*>(&e) ||
      dynamic_cast<const CapacityError*>(&e)) {
    return kExitDepth;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted inference on compressed latents"};
  app.require_subcommand(1);

  std::string preset, out, model, pub, latent, request, keys, trace, secret, logits, geometries, scores, labels, json;
  bool mock = false;
  std::uint64_t seed = 0;
  int reps = 5;
  double threshold = 0.5;

  auto* keygen = app.add_subcommand("keygen", "Generate parameters and keys");
  keygen->add_option("--params", preset, "Preset: " + [] {
    std::string s;
    for (const auto& n : ckks::CkksParams::preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }())->required();
  keygen->add_option("--out", out, "Output directory")->required();
  keygen->add_option("--model", model, "Bundle whose rotations to key (default: powers of two)");
  keygen->add_flag("--mock", mock, "Write params only, for the mock backend");
  keygen->add_option("--seed", seed, "Deterministic seed (0: system entropy)");

  auto* encrypt = app.add_subcommand("encrypt", "Encrypt a latent tensor into an inference request");
  encrypt->add_option("--pub", pub, "public.ckks (or params.ckks for a mock request)")->required();
  encrypt->add_option("--latent", latent, "Latent tensor file")->required();
  encrypt->add_option("--out", out, "Request file")->required();
  encrypt->add_option("--seed", seed, "Deterministic seed (0: system entropy)");

  auto* infer = app.add_subcommand("infer", "Run the model on an encrypted request");
  infer->add_option("--model", model, "Weight bundle")->required();
  infer->add_option("--request", request, "Request file")->required();
  infer->add_option("--keys", keys, "public.ckks (params.ckks with --mock)")->required();
  infer->add_option("--out", out, "Logits file")->required();
  infer->add_flag("--mock", mock, "Use the noise-free mock backend");
  infer->add_option("--trace", trace, "Write the per-layer trace as JSON");
  infer->add_option("--secret", secret, "secret.ckks; serves refresh round trips in-process");

  auto* finalize = app.add_subcommand("finalize", "Decrypt logits and print class probabilities");
  finalize->add_option("--secret", secret, "secret.ckks (params.ckks for mock logits)")->required();
  finalize->add_option("--logits", logits, "Logits file")->required();

  auto* bench = app.add_subcommand("bench", "Time encrypted inference across latent geometries");
  std::string bench_model = "sweep";
  bench->add_option("--model", bench_model, "sweep, resnet20-latent, or a bundle path")->capture_default_str();
  bench->add_option("--geometries", geometries, "Comma-separated HxWxC list (default: 128x128x2,64x64x3,32x32x4,16x16x8)");
  bench->add_option("--reps", reps, "Repetitions per geometry")->default_val(5)->check(CLI::PositiveNumber);
  bench->add_flag("--mock", mock, "Use the mock backend");
  bench->add_option("--json", json, "Write the report as JSON");

  auto* eval = app.add_subcommand("eval", "AUROC and F1 from score and label files");
  eval->add_option("--scores", scores, "Score CSV")->required();
  eval->add_option("--labels", labels, "Label CSV")->required();
  eval->add_option("--threshold", threshold, "F1 decision threshold")->default_val(0.5);
  eval->add_option("--out", json, "Write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*keygen) return cmd_keygen(preset, out, model, mock, seed);
    if (*encrypt) return cmd_encrypt(pub, latent, out, seed);
    if (*infer) return cmd_infer(model, request, keys, out, mock, trace, secret);
    if (*finalize) return cmd_finalize(secret, logits);
    if (*bench) return cmd_bench(bench_model, geometries, reps, mock, json);
    if (*eval) return cmd_eval(scores, labels, threshold, json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
  return kExitValidation;
}
