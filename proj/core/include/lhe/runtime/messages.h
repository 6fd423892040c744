// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include "lhe/ckks/keys.h"
#include "lhe/common/bytes.h"
#include "lhe/common/error.h"
#include "lhe/tensor/packed.h"

namespace lhe::runtime {

using tensor::PackedTensor;

enum class MessageType : std::uint8_t {
  kParamsHandshake = 1,
  kInferRequest = 2,
  kRefreshRequest = 3,
  kRefreshResponse = 4,
  kLogits = 5,
};

enum class Direction { kToServer, kToClient };

// True for any type that is or wraps secret-key material.
template <class T>
struct holds_secret : std::false_type {};
template <>
struct holds_secret<ckks::SecretKey> : std::true_type {};
template <>
struct holds_secret<ckks::KeySet> : std::true_type {};
template <class T>
struct holds_secret<std::vector<T>> : holds_secret<T> {};
template <class T>
struct holds_secret<std::optional<T>> : holds_secret<T> {};
template <class... Ts>
struct holds_secret<std::tuple<Ts...>> : std::disjunction<holds_secret<Ts>...> {};

// Every message declares its member types in `Fields`; the serializers
// destructure each message into exactly that many members, so the list
// cannot drift from the struct. Only messages whose fields hold no secret
// material can be framed for the server.
template <class M>
concept Message = requires {
  { M::kType } -> std::convertible_to<MessageType>;
  { M::kDirection } -> std::convertible_to<Direction>;
  typename M::Fields;
};

template <class M>
concept ServerBoundMessage = Message<M> && M::kDirection == Direction::kToServer &&
                             !holds_secret<typename M::Fields>::value;

template <class M>
concept ClientBoundMessage = Message<M> && M::kDirection == Direction::kToClient;

// Client -> server, once per session: public evaluation material.
struct ParamsHandshake {
  static constexpr MessageType kType = MessageType::kParamsHandshake;
  static constexpr Direction kDirection = Direction::kToServer;
  using Fields = std::tuple<std::string, ckks::EvaluationKeys>;
  std::string fingerprint;
  ckks::EvaluationKeys keys;
};

struct InferRequest {
  static constexpr MessageType kType = MessageType::kInferRequest;
  static constexpr Direction kDirection = Direction::kToServer;
  using Fields = std::tuple<std::string, PackedTensor>;
  std::string fingerprint;
  PackedTensor input;
};

// Server -> client at a refresh point.
struct RefreshRequest {
  static constexpr MessageType kType = MessageType::kRefreshRequest;
  static constexpr Direction kDirection = Direction::kToClient;
  using Fields = std::tuple<std::uint32_t, PackedTensor>;
  std::uint32_t layer = 0;
  PackedTensor tensor;
};

struct RefreshResponse {
  static constexpr MessageType kType = MessageType::kRefreshResponse;
  static constexpr Direction kDirection = Direction::kToServer;
  using Fields = std::tuple<std::uint32_t, PackedTensor>;
  std::uint32_t layer = 0;
  PackedTensor tensor;
};

struct LogitsMessage {
  static constexpr MessageType kType = MessageType::kLogits;
  static constexpr Direction kDirection = Direction::kToClient;
  using Fields = std::tuple<std::uint32_t, PackedTensor>;
  std::uint32_t num_classes = 0;
  PackedTensor logits;
};

using AnyMessage = std::variant<ParamsHandshake, InferRequest, RefreshRequest, RefreshResponse, LogitsMessage>;

// Frame: u32 payload length, u8 message type, payload.
template <class M>
  requires ServerBoundMessage<M> || ClientBoundMessage<M>
std::vector<std::uint8_t> frame(const M& message);

// Parses exactly one frame. Throws FormatError on malformed input.
AnyMessage parse_frame(std::span<const std::uint8_t> bytes);
// Typed parse: throws FormatError if the frame holds another type.
template <class M>
M parse_as(std::span<const std::uint8_t> bytes) {
  auto any = parse_frame(bytes);
  if (auto* m = std::get_if<M>(&any)) return std::move(*m);
  throw FormatError("unexpected message type");
}

void write_packed(ByteWriter& w, const PackedTensor& t);
PackedTensor read_packed(ByteReader& r);

}  // namespace lhe::runtime
