// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/model/bundle.h"

#include <zlib.h>

#include <cmath>
#include <set>

#include "json.hpp"
#include "lhe/common/bytes.h"
#include "lhe/common/error.h"

namespace lhe::model {
namespace {

using json = nlohmann::json;

class BlobWriter {
 public:
  void add(const std::string& name, const std::vector<double>& values, std::vector<std::uint64_t> shape) {
    std::uint64_t count = 1;
    for (auto d : shape) count *= d;
    if (count != values.size()) throw ShapeError("blob '" + name + "' size does not match its shape");
    body_.pad_to(8);
    table_[name] = {{"offset", body_.size()}, {"shape", shape}, {"dtype", "float32"}};
    for (double v : values) body_.f32(static_cast<float>(v));
  }
  json& table() { return table_; }
  std::vector<std::uint8_t> take() {
    body_.pad_to(8);
    return body_.take();
  }

 private:
  ByteWriter body_;
  json table_ = json::object();
};

class BlobReader {
 public:
  BlobReader(const json& table, std::span<const std::uint8_t> section) : table_(table), section_(section) {}

  bool has(const std::string& name) const { return table_.contains(name); }

  std::vector<double> get(const std::string& name, const std::vector<std::uint64_t>& shape, const std::string& layer) {
    if (!table_.contains(name)) throw LoadError("layer '" + layer + "': missing blob '" + name + "'");
    used_.insert(name);
    const auto& e = table_.at(name);
    std::vector<std::uint64_t> stored;
    std::uint64_t offset = 0;
    try {
      stored = e.at("shape").get<std::vector<std::uint64_t>>();
      offset = e.at("offset").get<std::uint64_t>();
      if (e.value("dtype", "float32") != "float32") throw LoadError("layer '" + layer + "': blob '" + name + "' is not float32");
    } catch (const json::exception&) {
      throw LoadError("layer '" + layer + "': malformed blob entry '" + name + "'");
    }
    if (stored != shape) {
      std::string want, got;
      for (auto d : shape) want += (want.empty() ? "" : "x") + std::to_string(d);
      for (auto d : stored) got += (got.empty() ? "" : "x") + std::to_string(d);
      throw LoadError("layer '" + layer + "': blob '" + name + "' has shape " + got + ", expected " + want);
    }
    std::uint64_t count = 1;
    for (auto d : shape) count *= d;
    if (offset % 8 != 0 || offset > section_.size() || (section_.size() - offset) / 4 < count) {
      throw LoadError("layer '" + layer + "': blob '" + name + "' lies outside the blob section");
    }
    ByteReader r(section_.subspan(offset, count * 4));
    std::vector<double> out(count);
    for (auto& v : out) {
      v = r.f32();
      if (!std::isfinite(v)) throw LoadError("layer '" + layer + "': blob '" + name + "' has a non-finite value");
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [name, entry] : table_.items())
      if (!used_.contains(name)) throw LoadError("blob '" + name + "' is not referenced by any layer");
  }

 private:
  const json& table_;
  std::span<const std::uint8_t> section_;
  std::set<std::string> used_;
};

json conv_fields(const ConvWeights& w) {
  return {{"in_channels", w.in_channels}, {"out_channels", w.out_channels}, {"kernel", w.kernel_h}, {"stride", w.stride}};
}

void put_conv(BlobWriter& blobs, const std::string& prefix, const ConvWeights& w) {
  blobs.add(prefix + ".weight", w.weights, {w.out_channels, w.in_channels, w.kernel_h, w.kernel_w});
  if (!w.bias.empty()) blobs.add(prefix + ".bias", w.bias, {w.out_channels});
}

void put_bn(BlobWriter& blobs, const std::string& prefix, const BatchNormParams& bn) {
  const std::uint64_t c = bn.gamma.size();
  blobs.add(prefix + ".gamma", bn.gamma, {c});
  blobs.add(prefix + ".beta", bn.beta, {c});
  blobs.add(prefix + ".running_mean", bn.mean, {c});
  blobs.add(prefix + ".running_var", bn.var, {c});
}

ConvWeights get_conv(BlobReader& blobs, const json& f, const std::string& prefix, const std::string& layer) {
  ConvWeights w;
  try {
    w.in_channels = f.at("in_channels").get<std::uint32_t>();
    w.out_channels = f.at("out_channels").get<std::uint32_t>();
    w.kernel_h = w.kernel_w = f.at("kernel").get<std::uint32_t>();
    w.stride = f.value("stride", 1u);
  } catch (const json::exception&) {
    throw LoadError("layer '" + layer + "': conv fields missing or malformed");
  }
  w.weights = blobs.get(prefix + ".weight", {w.out_channels, w.in_channels, w.kernel_h, w.kernel_w}, layer);
  w.bias = blobs.has(prefix + ".bias") ? blobs.get(prefix + ".bias", {w.out_channels}, layer)
                                       : std::vector<double>(w.out_channels, 0.0);
  return w;
}

BatchNormParams get_bn(BlobReader& blobs, const std::string& prefix, std::uint64_t channels, double eps,
                       const std::string& layer) {
  BatchNormParams bn;
  bn.eps = eps;
  bn.gamma = blobs.get(prefix + ".gamma", {channels}, layer);
  bn.beta = blobs.get(prefix + ".beta", {channels}, layer);
  bn.mean = blobs.get(prefix + ".running_mean", {channels}, layer);
  bn.var = blobs.get(prefix + ".running_var", {channels}, layer);
  return bn;
}

json polyact_json(const ActivationCoeffs& k) { return {{"a", k.a}, {"b", k.b}, {"c", k.c}}; }
json sigmoid_json(const ActivationCoeffs& k) {
  return {{"alpha", k.alpha}, {"beta", k.beta}, {"gamma", k.gamma}, {"d", k.d}};
}

}  // namespace

std::vector<std::uint8_t> encode_bundle(const Bundle& bundle) {
  const ModelGraph& g = bundle.graph;
  g.validate();
  BlobWriter blobs;
  json layers = json::array();
  std::uint32_t channels = g.input.channels;
  for (const auto& l : g.layers) {
    json j = {{"name", l.name}, {"kind", kind_name(l.kind)}};
    switch (l.kind) {
      case LayerKind::kConv:
        j.update(conv_fields(l.conv));
        put_conv(blobs, l.name, l.conv);
        channels = l.conv.out_channels;
        break;
      case LayerKind::kBatchNorm:
        j["eps"] = l.bn.eps;
        put_bn(blobs, l.name, l.bn);
        break;
      case LayerKind::kPolyact:
        j.update(polyact_json(l.act));
        break;
      case LayerKind::kApproxSigmoid:
        j.update(sigmoid_json(l.act));
        break;
      case LayerKind::kLinear:
        j["in_features"] = l.linear.in_features;
        j["out_features"] = l.linear.out_features;
        blobs.add(l.name + ".weight", l.linear.weights, {l.linear.out_features, l.linear.in_features});
        blobs.add(l.name + ".bias", l.linear.bias, {l.linear.out_features});
        break;
      case LayerKind::kSe:
        j["channels"] = l.se.channels;
        j["hidden"] = l.se.hidden;
        j["act"] = polyact_json(l.se.act);
        j["gate"] = sigmoid_json(l.se.gate);
        blobs.add(l.name + ".fc1.weight", l.se.fc1.weights, {l.se.hidden, l.se.channels});
        blobs.add(l.name + ".fc1.bias", l.se.fc1.bias, {l.se.hidden});
        blobs.add(l.name + ".fc2.weight", l.se.fc2.weights, {l.se.channels, l.se.hidden});
        blobs.add(l.name + ".fc2.bias", l.se.fc2.bias, {l.se.channels});
        break;
      case LayerKind::kResidualEnd:
        if (l.shortcut) {
          json sc = conv_fields(l.shortcut->conv);
          put_conv(blobs, l.name + ".shortcut", l.shortcut->conv);
          if (l.shortcut->bn) {
            sc["bn_eps"] = l.shortcut->bn->eps;
            put_bn(blobs, l.name + ".shortcut.bn", *l.shortcut->bn);
          }
          j["shortcut"] = sc;
        }
        break;
      case LayerKind::kGlobalAvgPool:
      case LayerKind::kResidualBegin:
        break;
    }
    layers.push_back(j);
  }
  (void)channels;
  json manifest = {{"format_version", kBundleFormatVersion},
                   {"input", {g.input.height, g.input.width, g.input.channels}},
                   {"num_classes", g.num_classes},
                   {"layers", layers},
                   {"blobs", blobs.table()},
                   {"metadata", bundle.metadata}};
  const std::string text = manifest.dump(1);
  const auto section = blobs.take();

  ByteWriter w;
  w.magic("WBND");
  w.u16(kBundleFormatVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  w.pad_to(8);
  w.raw(section);
  w.u32(static_cast<std::uint32_t>(crc32(0L, section.data(), static_cast<uInt>(section.size()))));
  return w.take();
}

Bundle decode_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("WBND");
  const std::uint16_t version = r.u16();
  if (version != kBundleFormatVersion) throw FormatError("unsupported weight bundle version " + std::to_string(version));
  const std::uint32_t manifest_len = r.u32();
  const auto text = r.raw(manifest_len);
  r.skip_to_alignment(8);
  if (r.remaining() < 4) throw FormatError("weight bundle is missing its checksum trailer");
  const auto section = bytes.subspan(r.position(), r.remaining() - 4);
  ByteReader trailer(bytes.subspan(bytes.size() - 4));
  const std::uint32_t stored_crc = trailer.u32();
  const auto crc = static_cast<std::uint32_t>(crc32(0L, section.data(), static_cast<uInt>(section.size())));
  if (crc != stored_crc) throw LoadError("weight bundle checksum mismatch");

  json m;
  try {
    m = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("weight bundle manifest is not valid JSON: ") + e.what());
  }
  Bundle out;
  ModelGraph& g = out.graph;
  try {
    const auto input = m.at("input").get<std::vector<std::uint32_t>>();
    if (input.size() != 3) throw LoadError("manifest input must be [H, W, C]");
    g.input = {input[0], input[1], input[2]};
    g.num_classes = m.at("num_classes").get<std::uint32_t>();
    if (m.contains("metadata")) out.metadata = m.at("metadata").get<std::map<std::string, std::string>>();
  } catch (const json::exception&) {
    throw LoadError("manifest header fields missing or malformed");
  }
  const json blob_table = m.value("blobs", json::object());
  BlobReader blobs(blob_table, section);
  std::uint32_t channels = g.input.channels;
  for (const auto& j : m.value("layers", json::array())) {
    LayerSpec l;
    try {
      l.name = j.at("name").get<std::string>();
      l.kind = kind_from_name(j.at("kind").get<std::string>());
    } catch (const json::exception&) {
      throw LoadError("layer entry without name or kind");
    }
    try {
      switch (l.kind) {
        case LayerKind::kConv:
          l.conv = get_conv(blobs, j, l.name, l.name);
          channels = l.conv.out_channels;
          break;
        case LayerKind::kBatchNorm:
          l.bn = get_bn(blobs, l.name, channels, j.value("eps", 1e-5), l.name);
          break;
        case LayerKind::kPolyact:
          l.act = ActivationCoeffs::polyact(j.at("a"), j.at("b"), j.at("c"));
          break;
        case LayerKind::kApproxSigmoid:
          l.act = ActivationCoeffs::approx_sigmoid(j.at("alpha"), j.at("beta"), j.at("gamma"), j.at("d"));
          break;
        case LayerKind::kLinear:
          l.linear.in_features = j.at("in_features");
          l.linear.out_features = j.at("out_features");
          l.linear.weights = blobs.get(l.name + ".weight", {l.linear.out_features, l.linear.in_features}, l.name);
          l.linear.bias = blobs.get(l.name + ".bias", {l.linear.out_features}, l.name);
          break;
        case LayerKind::kSe: {
          auto& se = l.se;
          se.channels = j.at("channels");
          se.hidden = j.at("hidden");
          const auto& a = j.at("act");
          const auto& s = j.at("gate");
          se.act = ActivationCoeffs::polyact(a.at("a"), a.at("b"), a.at("c"));
          se.gate = ActivationCoeffs::approx_sigmoid(s.at("alpha"), s.at("beta"), s.at("gamma"), s.at("d"));
          se.fc1 = {se.hidden, se.channels, blobs.get(l.name + ".fc1.weight", {se.hidden, se.channels}, l.name),
                    blobs.get(l.name + ".fc1.bias", {se.hidden}, l.name)};
          se.fc2 = {se.channels, se.hidden, blobs.get(l.name + ".fc2.weight", {se.channels, se.hidden}, l.name),
                    blobs.get(l.name + ".fc2.bias", {se.channels}, l.name)};
          break;
        }
        case LayerKind::kResidualEnd:
          if (j.contains("shortcut")) {
            const auto& sc = j.at("shortcut");
            Shortcut shortcut;
            shortcut.conv = get_conv(blobs, sc, l.name + ".shortcut", l.name);
            if (sc.contains("bn_eps")) {
              shortcut.bn = get_bn(blobs, l.name + ".shortcut.bn", shortcut.conv.out_channels, sc.at("bn_eps"), l.name);
            }
            l.shortcut = std::move(shortcut);
          }
          break;
        case LayerKind::kGlobalAvgPool:
        case LayerKind::kResidualBegin:
          break;
      }
    } catch (const json::exception&) {
      throw LoadError("layer '" + l.name + "': fields missing or malformed");
    }
    g.layers.push_back(std::move(l));
  }
  blobs.check_all_used();
  try {
    g.validate();
  } catch (const ShapeError& e) {
    throw LoadError(e.what());
  }
  return out;
}

Bundle load_bundle(const std::string& path) { return decode_bundle(read_file(path)); }

void save_bundle(const std::string& path, const Bundle& bundle) { write_file(path, encode_bundle(bundle)); }

ModelGraph load_weights(const std::string& path) { return fold_batchnorm(load_bundle(path).graph); }

}  // namespace lhe::model
