// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <zlib.h>

#include <filesystem>

#include "golden.h"
#include "json.hpp"
#include "lhe/common/bytes.h"
#include "lhe/common/error.h"
#include "lhe/model/bundle.h"
#include "lhe/model/resnet.h"
#include "test_util.h"

namespace lhe::model {
namespace {

using json = nlohmann::json;

Bundle small_bundle() {
  ResNetOptions o;
  o.input = {8, 8, 2};
  o.widths = {2, 4, 4};
  o.blocks_per_stage = 1;
  o.num_classes = 3;
  o.squeeze_excite = true;
  o.seed = 5;
  return Bundle{build_resnet20_latent(o), {{"name", "small"}}};
}

// Splits an encoded bundle so tests can rewrite the manifest.
struct Parts {
  json manifest;
  std::vector<std::uint8_t> section;
};

Parts split(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("WBND");
  r.u16();
  const auto len = r.u32();
  const auto text = r.raw(len);
  r.skip_to_alignment(8);
  Parts p;
  p.manifest = json::parse(text.begin(), text.end());
  const auto rest = r.raw(r.remaining() - 4);
  p.section.assign(rest.begin(), rest.end());
  return p;
}

std::vector<std::uint8_t> join(const Parts& p) {
  const std::string text = p.manifest.dump();
  ByteWriter w;
  w.magic("WBND");
  w.u16(kBundleFormatVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  w.pad_to(8);
  w.raw(p.section);
  w.u32(static_cast<std::uint32_t>(crc32(0L, p.section.data(), static_cast<uInt>(p.section.size()))));
  return w.take();
}

std::string load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_bundle(bytes);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "<no error>";
}

TEST(Bundle, RoundTripIsExact) {
  const auto b = small_bundle();
  const auto bytes = encode_bundle(b);
  const auto back = decode_bundle(bytes);
  EXPECT_TRUE(back.graph == b.graph);
  EXPECT_EQ(back.metadata, b.metadata);
  EXPECT_EQ(encode_bundle(back), bytes);
}

TEST(Bundle, Golden) { testing::expect_golden("bundle_small.wbnd", encode_bundle(small_bundle())); }

TEST(Bundle, LayoutIsAligned) {
  const auto bytes = encode_bundle(small_bundle());
  const auto p = split(bytes);
  EXPECT_EQ(p.section.size() % 8, 0u);
  for (const auto& [name, e] : p.manifest.at("blobs").items()) {
    EXPECT_EQ(e.at("offset").get<std::uint64_t>() % 8, 0u) << name;
    EXPECT_EQ(e.at("dtype"), "float32");
  }
  EXPECT_TRUE(p.manifest.at("blobs").contains("stem.conv.weight"));
  EXPECT_TRUE(p.manifest.at("blobs").contains("stem.bn.running_var"));
  EXPECT_TRUE(p.manifest.at("blobs").contains("stage2.block1.add.shortcut.weight"));
}

TEST(Bundle, MissingBlobNamesLayer) {
  auto p = split(encode_bundle(small_bundle()));
  p.manifest["blobs"].erase("stage1.block1.conv2.weight");
  const auto msg = load_error(join(p));
  EXPECT_NE(msg.find("stage1.block1.conv2"), std::string::npos) << msg;
}

TEST(Bundle, MisshapedConvNamesLayer) {
  auto p = split(encode_bundle(small_bundle()));
  p.manifest["blobs"]["stage2.block1.conv1.weight"]["shape"] = {4, 2, 3, 2};
  const auto msg = load_error(join(p));
  EXPECT_NE(msg.find("stage2.block1.conv1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("shape"), std::string::npos) << msg;
}

TEST(Bundle, InconsistentLayerFieldsNameLayer) {
  auto p = split(encode_bundle(small_bundle()));
  for (auto& l : p.manifest["layers"]) {
    if (l["name"] == "stage3.block1.conv1") l["in_channels"] = 3;
  }
  const auto msg = load_error(join(p));
  EXPECT_NE(msg.find("stage3.block1.conv1"), std::string::npos) << msg;
}

TEST(Bundle, UnreferencedBlobRejected) {
  auto p = split(encode_bundle(small_bundle()));
  p.manifest["blobs"]["ghost.weight"] = {{"offset", 0}, {"shape", {1}}, {"dtype", "float32"}};
  EXPECT_NE(load_error(join(p)).find("ghost.weight"), std::string::npos);
}

TEST(Bundle, ChecksumDetectsCorruption) {
  auto bytes = encode_bundle(small_bundle());
  bytes[bytes.size() - 40] ^= 0x10;
  EXPECT_NE(load_error(bytes).find("checksum"), std::string::npos);
}

TEST(Bundle, MalformedContainer) {
  auto bytes = encode_bundle(small_bundle());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_bundle(bad_magic), FormatError);
  auto truncated = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 9);
  EXPECT_THROW(decode_bundle(truncated), FormatError);
  auto p = split(bytes);
  p.manifest["layers"][0]["kind"] = "deconv";
  EXPECT_THROW(decode_bundle(join(p)), LoadError);
}

TEST(Bundle, LoadWeightsFolds) {
  const auto b = small_bundle();
  const auto path = (std::filesystem::temp_directory_path() / "lhe_bundle_test.wbnd").string();
  save_bundle(path, b);
  const auto g = load_weights(path);
  std::filesystem::remove(path);
  for (const auto& l : g.layers) EXPECT_NE(l.kind, LayerKind::kBatchNorm);
  const auto x = testing::random_tensor(8, 8, 2, 3);
  const auto a = plaintext_forward(b.graph, x);
  const auto c = plaintext_forward(g, x);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], c[i], 1e-9);
}

}  // namespace
}  // namespace lhe::model
