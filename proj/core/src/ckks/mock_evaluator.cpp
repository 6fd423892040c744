// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "lhe/ckks/evaluator.h"
#include "lhe/common/error.h"

namespace lhe::ckks {
namespace {

Ciphertext like(const Ciphertext& a) {
  Ciphertext out;
  out.backend = Backend::kMock;
  out.slots.resize(a.slots.size());
  return out;
}

class MockAccumulator final : public LinearAccumulator {
 public:
  MockAccumulator(std::size_t slots, int level, double ct_scale, double coeff_scale)
      : acc_(slots, 0.0), level_(level), ct_scale_(ct_scale), coeff_scale_(coeff_scale) {}

  void add(const Ciphertext& ct, double coeff) override {
    if (ct.backend != Backend::kMock) throw ParamError("accumulator: backend mismatch");
    if (ct.level != level_ || !Evaluator::same_scale(ct.scale, ct_scale_)) {
      throw DepthError("accumulator: operand level/scale differs from accumulator");
    }
    if (coeff == 0.0) return;
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += coeff * ct.slots[i];
  }

  Ciphertext finish() override {
    Ciphertext out;
    out.backend = Backend::kMock;
    out.slots = std::move(acc_);
    out.level = level_;
    out.scale = ct_scale_ * coeff_scale_;
    return out;
  }

 private:
  std::vector<double> acc_;
  int level_;
  double ct_scale_, coeff_scale_;
};

}  // namespace

Plaintext MockEvaluator::encode(std::span<const double> values, int level, double scale) const {
  const std::uint32_t slots = context().slot_count();
  if (values.size() > slots) throw CapacityError("vector longer than slot_count");
  if (level < 0 || level > context().max_level()) throw DepthError("encode: level out of range");
  Plaintext pt;
  pt.backend = Backend::kMock;
  pt.level = level;
  pt.scale = scale;
  pt.values.assign(slots, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw CapacityError("non-finite slot value");
    pt.values[i] = values[i];
  }
  return pt;
}

std::unique_ptr<LinearAccumulator> MockEvaluator::make_accumulator(int level, double ct_scale,
                                                                   double coeff_scale) const {
  return std::make_unique<MockAccumulator>(context().slot_count(), level, ct_scale, coeff_scale);
}

Ciphertext MockEvaluator::add_raw(const Ciphertext& a, const Ciphertext& b, bool subtract) const {
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = subtract ? a.slots[i] - b.slots[i] : a.slots[i] + b.slots[i];
  return out;
}

Ciphertext MockEvaluator::negate_raw(const Ciphertext& a) const {
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = -a.slots[i];
  return out;
}

Ciphertext MockEvaluator::add_plain_raw(const Ciphertext& a, const Plaintext& pt) const {
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = a.slots[i] + pt.values[i];
  return out;
}

Ciphertext MockEvaluator::mul_plain_raw(const Ciphertext& a, const Plaintext& pt) const {
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = a.slots[i] * pt.values[i];
  return out;
}

Ciphertext MockEvaluator::mul_const_raw(const Ciphertext& a, double value, double coeff_scale) const {
  // Same range check as the real backend so both reject the same inputs.
  context().integer_residues(value, coeff_scale, 0);
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = value * a.slots[i];
  return out;
}

Ciphertext MockEvaluator::mul_raw(const Ciphertext& a, const Ciphertext& b) const {
  Ciphertext out = like(a);
  for (std::size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = a.slots[i] * b.slots[i];
  return out;
}

Ciphertext MockEvaluator::rescale_raw(const Ciphertext& a) const { return a; }

Ciphertext MockEvaluator::drop_raw(const Ciphertext& a, int) const { return a; }

std::vector<Ciphertext> MockEvaluator::rotate_raw(const Ciphertext& a, std::span<const int> steps) const {
  std::vector<Ciphertext> out;
  const std::size_t n = a.slots.size();
  for (int s : steps) {
    Ciphertext r = like(a);
    for (std::size_t i = 0; i < n; ++i) r.slots[i] = a.slots[(i + static_cast<std::size_t>(s)) % n];
    out.push_back(std::move(r));
  }
  return out;
}

Ciphertext MockEncryptor::encrypt(std::span<const double> values, Prng&) const {
  const std::uint32_t slots = ctx_->slot_count();
  if (values.size() > slots) throw CapacityError("vector longer than slot_count");
  Ciphertext ct;
  ct.backend = Backend::kMock;
  ct.slots.assign(slots, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw CapacityError("non-finite slot value");
    ct.slots[i] = values[i];
  }
  ct.level = ctx_->max_level();
  ct.scale = ctx_->params().default_scale;
  return ct;
}

SlotVector MockDecryptor::decrypt(const Ciphertext& ct) const {
  if (ct.backend != Backend::kMock) throw ParamError("mock decryptor given a real ciphertext");
  return ct.slots;
}

}  // namespace lhe::ckks
