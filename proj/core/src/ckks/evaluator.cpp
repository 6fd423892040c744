// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/ckks/evaluator.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lhe/common/error.h"

namespace lhe::ckks {

bool Evaluator::same_scale(double a, double b) {
  return std::abs(a - b) <= kScaleTolerance * std::max(std::abs(a), std::abs(b));
}

void Evaluator::check_backend(const Ciphertext& a) const {
  if (a.backend != backend()) throw ParamError("ciphertext belongs to a different backend");
  if (a.level < 0 || a.level > ctx_->max_level()) throw ParamError("ciphertext level outside the modulus chain");
}

Ciphertext Evaluator::mod_switch_to(const Ciphertext& a, int level) const {
  check_backend(a);
  if (level > a.level) throw DepthError("mod_switch_to: cannot raise level " + std::to_string(a.level) + " to " + std::to_string(level));
  if (level < 0) throw DepthError("mod_switch_to: negative level");
  if (level == a.level) return a;
  Ciphertext out = drop_raw(a, level);
  out.level = level;
  out.scale = a.scale;
  out.backend = a.backend;
  return out;
}

Ciphertext Evaluator::rescale(const Ciphertext& a) const {
  check_backend(a);
  if (a.level < 1) throw DepthError("rescale: level exhausted");
  Ciphertext out = rescale_raw(a);
  out.level = a.level - 1;
  out.scale = a.scale / static_cast<double>(ctx_->prime(a.level));
  out.backend = a.backend;
  return out;
}

std::pair<Ciphertext, Ciphertext> Evaluator::align(const Ciphertext& a, const Ciphertext& b) const {
  check_backend(a);
  check_backend(b);
  Ciphertext x = a;
  Ciphertext y = b;
  if (!same_scale(x.scale, y.scale)) {
    const int level = std::min(x.level, y.level);
    Ciphertext& small = x.scale < y.scale ? x : y;
    Ciphertext& large = x.scale < y.scale ? y : x;
    if (level < 1) throw DepthError("align: scale mismatch with no level left to correct it");
    small = multiply_scalar(mod_switch_to(small, level), 1.0, large.scale);
  }
  const int level = std::min(x.level, y.level);
  x = mod_switch_to(x, level);
  y = mod_switch_to(y, level);
  y.scale = x.scale;
  return {std::move(x), std::move(y)};
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b) const {
  auto [x, y] = align(a, b);
  Ciphertext out = add_raw(x, y, false);
  out.level = x.level;
  out.scale = x.scale;
  out.backend = x.backend;
  return out;
}

Ciphertext Evaluator::sub(const Ciphertext& a, const Ciphertext& b) const {
  auto [x, y] = align(a, b);
  Ciphertext out = add_raw(x, y, true);
  out.level = x.level;
  out.scale = x.scale;
  out.backend = x.backend;
  return out;
}

Ciphertext Evaluator::negate(const Ciphertext& a) const {
  check_backend(a);
  Ciphertext out = negate_raw(a);
  out.level = a.level;
  out.scale = a.scale;
  out.backend = a.backend;
  return out;
}

Ciphertext Evaluator::add_plain(const Ciphertext& a, std::span<const double> values) const {
  check_backend(a);
  Plaintext pt = encode(values, a.level, a.scale);
  Ciphertext out = add_plain_raw(a, pt);
  out.level = a.level;
  out.scale = a.scale;
  out.backend = a.backend;
  return out;
}

Ciphertext Evaluator::add_constant(const Ciphertext& a, double value) const {
  std::vector<double> values(ctx_->slot_count(), value);
  return add_plain(a, values);
}

Ciphertext Evaluator::multiply_raw(const Ciphertext& a, const Ciphertext& b) const {
  check_backend(a);
  check_backend(b);
  const int level = std::min(a.level, b.level);
  Ciphertext x = mod_switch_to(a, level);
  Ciphertext y = mod_switch_to(b, level);
  Ciphertext out = mul_raw(x, y);
  out.level = level;
  out.scale = x.scale * y.scale;
  out.backend = x.backend;
  return out;
}

Ciphertext Evaluator::multiply(const Ciphertext& a, const Ciphertext& b) const {
  if (std::min(a.level, b.level) < 1) throw DepthError("multiply: level exhausted");
  return rescale(multiply_raw(a, b));
}

Ciphertext Evaluator::square(const Ciphertext& a) const { return multiply(a, a); }

Ciphertext Evaluator::multiply_plain_raw(const Ciphertext& a, const Plaintext& pt) const {
  check_backend(a);
  if (pt.level != a.level) throw DepthError("multiply_plain_raw: plaintext level differs from ciphertext level");
  Ciphertext out = mul_plain_raw(a, pt);
  out.level = a.level;
  out.scale = a.scale * pt.scale;
  out.backend = a.backend;
  return out;
}

Ciphertext Evaluator::multiply_scalar_raw(const Ciphertext& a, double value, double coeff_scale) const {
  check_backend(a);
  Ciphertext out = mul_const_raw(a, value, coeff_scale);
  out.level = a.level;
  out.scale = a.scale * coeff_scale;
  out.backend = a.backend;
  return out;
}

Ciphertext Evaluator::multiply_plain(const Ciphertext& a, std::span<const double> values, double target_scale) const {
  check_backend(a);
  if (a.level < 1) throw DepthError("multiply_plain: level exhausted");
  const double target = target_scale > 0 ? target_scale : default_scale();
  const double pt_scale = target * static_cast<double>(ctx_->prime(a.level)) / a.scale;
  Ciphertext out = rescale(multiply_plain_raw(a, encode(values, a.level, pt_scale)));
  out.scale = target;
  return out;
}

Ciphertext Evaluator::multiply_scalar(const Ciphertext& a, double value, double target_scale) const {
  check_backend(a);
  if (a.level < 1) throw DepthError("multiply_scalar: level exhausted");
  const double target = target_scale > 0 ? target_scale : default_scale();
  const double coeff_scale = target * static_cast<double>(ctx_->prime(a.level)) / a.scale;
  Ciphertext out = rescale(multiply_scalar_raw(a, value, coeff_scale));
  out.scale = target;
  return out;
}

Ciphertext Evaluator::rotate(const Ciphertext& a, int step) const {
  int s = step;
  return std::move(rotate_many(a, std::span<const int>(&s, 1)).front());
}

std::vector<Ciphertext> Evaluator::rotate_many(const Ciphertext& a, std::span<const int> steps) const {
  check_backend(a);
  std::vector<int> normalized;
  normalized.reserve(steps.size());
  for (int s : steps) normalized.push_back(ctx_->normalize_step(s));
  std::vector<Ciphertext> out = rotate_raw(a, normalized);
  for (auto& ct : out) {
    ct.level = a.level;
    ct.scale = a.scale;
    ct.backend = a.backend;
  }
  return out;
}

}  // namespace lhe::ckks
