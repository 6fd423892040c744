// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/params.h"

#include <cmath>
#include <map>

#include "lhe/ckks/modarith.h"
#include "lhe/common/error.h"

namespace lhe::ckks {
namespace {

constexpr double kScale40 = 1099511627776.0;  // 2^40

std::vector<int> chain(int base_bits, int middle_bits, int middle_count) {
  std::vector<int> bits{base_bits};
  for (int i = 0; i < middle_count; ++i) bits.push_back(middle_bits);
  return bits;
}

}  // namespace

void CkksParams::validate() const {
  if (ring_degree < 4 || (ring_degree & (ring_degree - 1)) != 0) {
    throw ParamError("ring_degree not a power of two");
  }
  if (ring_degree > (1u << 17)) throw ParamError("ring_degree too large (max 2^17)");
  if (modulus_bits.size() < 2) throw ParamError("modulus_chain needs at least 2 primes");
  for (int b : modulus_bits) {
    if (b < 20 || b > 60) throw ParamError("modulus bit size must be in [20, 60]");
  }
  if (special_bits < 20 || special_bits > 60) throw ParamError("special prime bit size must be in [20, 60]");
  if (!(default_scale > 1.0) || !std::isfinite(default_scale)) throw ParamError("default_scale must be > 1");
  if (std::exp2(std::round(std::log2(default_scale))) != default_scale) {
    throw ParamError("default_scale must be a power of two");
  }
}

std::vector<std::uint64_t> generate_primes(const CkksParams& params) {
  params.validate();
  const std::uint64_t step = 2ull * params.ring_degree;
  std::map<int, std::uint64_t> cursor;  // next candidate per bit size
  auto next_prime = [&](int bits) {
    auto it = cursor.find(bits);
    std::uint64_t candidate = it == cursor.end() ? (std::uint64_t{1} << bits) + 1 : it->second;
    while (!is_prime(candidate)) candidate += step;
    cursor[bits] = candidate + step;
    return candidate;
  };
  std::vector<std::uint64_t> primes;
  for (int b : params.modulus_bits) primes.push_back(next_prime(b));
  primes.push_back(next_prime(params.special_bits));
  return primes;
}

CkksParams CkksParams::for_slot_demand(std::uint32_t slot_demand, std::vector<int> modulus_bits,
                                       double default_scale) {
  CkksParams p;
  p.ring_degree = 8;
  while (p.ring_degree / 2 < slot_demand) p.ring_degree *= 2;
  p.modulus_bits = std::move(modulus_bits);
  p.special_bits = 60;
  p.default_scale = default_scale;
  p.security_note = "sized to slot demand for latency measurement only; no security claim";
  return p;
}

CkksParams CkksParams::preset(const std::string& name) {
  CkksParams p;
  p.special_bits = 60;
  p.default_scale = kScale40;
  if (name == "default") {
    p.ring_degree = 8192;
    p.modulus_bits = chain(60, 40, 4);
    p.security_note = "N=8192, log2(PQ)~280: below the 128-bit HE-standard bound (218); roughly 100-bit estimate";
  } else if (name == "resnet20") {
    p.ring_degree = 8192;
    p.modulus_bits = chain(60, 40, 6);
    p.security_note = "N=8192, log2(PQ)~360: roughly 70-80-bit estimate; desk-scale demonstration parameters";
  } else if (name == "resnet20-se") {
    p.ring_degree = 8192;
    p.modulus_bits = chain(60, 40, 12);
    p.security_note = "N=8192, log2(PQ)~600: well below 128-bit; desk-scale demonstration parameters";
  } else if (name == "ops") {
    p.ring_degree = 2048;
    p.modulus_bits = chain(60, 40, 10);
    p.security_note = "test-only ring; no security claim";
  } else if (name == "test") {
    p.ring_degree = 256;
    p.modulus_bits = chain(60, 40, 4);
    p.security_note = "test-only ring; no security claim";
  } else {
    throw ParamError("unknown parameter preset: " + name);
  }
  return p;
}

std::vector<std::string> CkksParams::preset_names() { return {"default", "resnet20", "resnet20-se", "ops", "test"}; }

}  // namespace lhe::ckks
