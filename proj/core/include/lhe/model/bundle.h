// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lhe/model/graph.h"

namespace lhe::model {

// WeightBundle file:
//   "WBND", u16 version, u32 manifest length, UTF-8 JSON manifest,
//   zero padding to an 8-byte boundary, blob section, u32 CRC-32 (zlib) of
//   the blob section.
// Blobs are float32 little-endian, 8-byte aligned, with offsets relative to
// the start of the blob section. The manifest lists layers in order (with
// their scalar fields) and a "blobs" table keyed "<layer>.<tensor>".
inline constexpr std::uint16_t kBundleFormatVersion = 1;

struct Bundle {
  ModelGraph graph;  // as stored: batch norm not folded
  std::map<std::string, std::string> metadata;
};

std::vector<std::uint8_t> encode_bundle(const Bundle& bundle);
// Throws LoadError naming the offending layer, FormatError for a malformed
// container.
Bundle decode_bundle(std::span<const std::uint8_t> bytes);

Bundle load_bundle(const std::string& path);
void save_bundle(const std::string& path, const Bundle& bundle);

// Loads, validates and folds batch norm: the graph the runtime executes.
ModelGraph load_weights(const std::string& path);

}  // namespace lhe::model
