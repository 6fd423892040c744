// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/runtime/messages.h"

#include <limits>

#include "lhe/ckks/serialize.h"

namespace lhe::runtime {
namespace {

constexpr std::uint32_t kMaxChannels = 1u << 16;

void check_fields(const ParamsHandshake& m) {
  [[maybe_unused]] const auto& [a, b] = m;
  static_assert(std::tuple_size_v<ParamsHandshake::Fields> == 2);
}
void check_fields(const InferRequest& m) {
  [[maybe_unused]] const auto& [a, b] = m;
  static_assert(std::tuple_size_v<InferRequest::Fields> == 2);
}
void check_fields(const RefreshRequest& m) {
  [[maybe_unused]] const auto& [a, b] = m;
  static_assert(std::tuple_size_v<RefreshRequest::Fields> == 2);
}
void check_fields(const RefreshResponse& m) {
  [[maybe_unused]] const auto& [a, b] = m;
  static_assert(std::tuple_size_v<RefreshResponse::Fields> == 2);
}
void check_fields(const LogitsMessage& m) {
  [[maybe_unused]] const auto& [a, b] = m;
  static_assert(std::tuple_size_v<LogitsMessage::Fields> == 2);
}

void write_body(ByteWriter& w, const ParamsHandshake& m) {
  w.str(m.fingerprint);
  const auto keys = ckks::serialize(m.keys);
  w.u64(keys.size());
  w.raw(keys);
}
void write_body(ByteWriter& w, const InferRequest& m) {
  w.str(m.fingerprint);
  write_packed(w, m.input);
}
void write_body(ByteWriter& w, const RefreshRequest& m) {
  w.u32(m.layer);
  write_packed(w, m.tensor);
}
void write_body(ByteWriter& w, const RefreshResponse& m) {
  w.u32(m.layer);
  write_packed(w, m.tensor);
}
void write_body(ByteWriter& w, const LogitsMessage& m) {
  w.u32(m.num_classes);
  write_packed(w, m.logits);
}

}  // namespace

void write_packed(ByteWriter& w, const PackedTensor& t) {
  w.u32(t.height);
  w.u32(t.width);
  w.u32(t.stride_phase);
  w.u8(t.replicated ? 1 : 0);
  w.u32(t.span);
  w.u32(static_cast<std::uint32_t>(t.channels.size()));
  for (const auto& ct : t.channels) ckks::write_ciphertext(w, ct);
}

PackedTensor read_packed(ByteReader& r) {
  PackedTensor t;
  t.height = r.u32();
  t.width = r.u32();
  t.stride_phase = r.u32();
  const auto rep = r.u8();
  if (rep > 1) throw FormatError("packed tensor: bad replicated flag");
  t.replicated = rep == 1;
  t.span = r.u32();
  const std::uint32_t n = r.u32();
  if (n > kMaxChannels) throw FormatError("packed tensor: implausible channel count");
  if (t.stride_phase == 0) throw FormatError("packed tensor: zero stride phase");
  t.channels.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) t.channels.push_back(ckks::read_ciphertext(r));
  return t;
}

template <class M>
  requires ServerBoundMessage<M> || ClientBoundMessage<M>
std::vector<std::uint8_t> frame(const M& message) {
  check_fields(message);
  ByteWriter body;
  write_body(body, message);
  const auto payload = body.take();
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("message exceeds 4 GiB");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u8(static_cast<std::uint8_t>(M::kType));
  w.raw(payload);
  return w.take();
}

template std::vector<std::uint8_t> frame(const ParamsHandshake&);
template std::vector<std::uint8_t> frame(const InferRequest&);
template std::vector<std::uint8_t> frame(const RefreshRequest&);
template std::vector<std::uint8_t> frame(const RefreshResponse&);
template std::vector<std::uint8_t> frame(const LogitsMessage&);

AnyMessage parse_frame(std::span<const std::uint8_t> bytes) {
  ByteReader header(bytes);
  const std::uint32_t len = header.u32();
  const std::uint8_t type = header.u8();
  if (header.remaining() != len) throw FormatError("frame length does not match payload");
  ByteReader r(bytes.subspan(5));
  AnyMessage out;
  switch (static_cast<MessageType>(type)) {
    case MessageType::kParamsHandshake: {
      ParamsHandshake m;
      m.fingerprint = r.str();
      const auto n = r.u64();
      if (n > r.remaining()) throw FormatError("handshake: truncated key material");
      m.keys = ckks::deserialize_evaluation_keys(r.raw(static_cast<std::size_t>(n)));
      out = std::move(m);
      break;
    }
    case MessageType::kInferRequest: {
      InferRequest m;
      m.fingerprint = r.str();
      m.input = read_packed(r);
      out = std::move(m);
      break;
    }
    case MessageType::kRefreshRequest: {
      RefreshRequest m;
      m.layer = r.u32();
      m.tensor = read_packed(r);
      out = std::move(m);
      break;
    }
    case MessageType::kRefreshResponse: {
      RefreshResponse m;
      m.layer = r.u32();
      m.tensor = read_packed(r);
      out = std::move(m);
      break;
    }
    case MessageType::kLogits: {
      LogitsMessage m;
      m.num_classes = r.u32();
      m.logits = read_packed(r);
      out = std::move(m);
      break;
    }
    default:
      throw FormatError("unknown message type " + std::to_string(type));
  }
  if (!r.done()) throw FormatError("trailing bytes after message payload");
  return out;
}

}  // namespace lhe::runtime
