// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "lhe/ckks/ciphertext.h"
#include "lhe/ckks/context.h"
#include "lhe/ckks/keys.h"
#include "lhe/common/prng.h"

namespace lhe::ckks {

// Accumulates sum_i coeff_i * ct_i without rescaling. Every input must sit at
// the accumulator's level and scale; the result has scale
// ct_scale * coeff_scale (real coefficients are rounded to integers at
// coeff_scale).
class LinearAccumulator {
 public:
  virtual ~LinearAccumulator() = default;
  virtual void add(const Ciphertext& ct, double coeff) = 0;
  virtual Ciphertext finish() = 0;
};

// Homomorphic evaluation. The public operations do all level/scale
// bookkeeping here, once, and delegate ring arithmetic to the backend
// primitives, so real and mock backends produce identical level and scale
// traces for the same op sequence.
//
// Scale convention: multiply_plain / multiply_scalar land exactly on the
// requested target scale (the plaintext is encoded at target * q / scale);
// ciphertext-ciphertext products carry scale_a * scale_b / q.
class Evaluator {
 public:
  explicit Evaluator(std::shared_ptr<const CkksContext> ctx) : ctx_(std::move(ctx)) {}
  virtual ~Evaluator() = default;

  virtual Backend backend() const = 0;
  const CkksContext& context() const { return *ctx_; }
  const std::shared_ptr<const CkksContext>& context_ptr() const { return ctx_; }
  double default_scale() const { return ctx_->params().default_scale; }

  static int level_of(const Ciphertext& ct) { return ct.level; }
  static double scale_of(const Ciphertext& ct) { return ct.scale; }

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext negate(const Ciphertext& a) const;
  // Encodes `values` at the ciphertext's own level and scale.
  Ciphertext add_plain(const Ciphertext& a, std::span<const double> values) const;
  Ciphertext add_constant(const Ciphertext& a, double value) const;

  // Relinearized and rescaled; level drops by one.
  Ciphertext multiply(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext square(const Ciphertext& a) const;
  // Rescaled; level drops by one; result scale is exactly `target_scale`
  // (0 means the default scale).
  Ciphertext multiply_plain(const Ciphertext& a, std::span<const double> values, double target_scale = 0) const;
  Ciphertext multiply_scalar(const Ciphertext& a, double value, double target_scale = 0) const;

  // Left rotation: result[i] = a[(i + step) mod slots].
  Ciphertext rotate(const Ciphertext& a, int step) const;
  // Several rotations of one ciphertext; directly keyed steps share a single
  // decomposition on the real backend.
  std::vector<Ciphertext> rotate_many(const Ciphertext& a, std::span<const int> steps) const;

  Ciphertext mod_switch_to(const Ciphertext& a, int level) const;
  Ciphertext rescale(const Ciphertext& a) const;
  // Brings both operands to a common level and scale. A scale mismatch is
  // resolved by multiplying the smaller-scale operand by a constant 1 encoded
  // to land on the larger scale (costs that operand one level).
  std::pair<Ciphertext, Ciphertext> align(const Ciphertext& a, const Ciphertext& b) const;

  // Unrescaled building blocks.
  virtual Plaintext encode(std::span<const double> values, int level, double scale) const = 0;
  Ciphertext multiply_plain_raw(const Ciphertext& a, const Plaintext& pt) const;
  Ciphertext multiply_raw(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext multiply_scalar_raw(const Ciphertext& a, double value, double coeff_scale) const;
  virtual std::unique_ptr<LinearAccumulator> make_accumulator(int level, double ct_scale,
                                                              double coeff_scale) const = 0;

  // Relative tolerance under which two scales count as equal.
  static constexpr double kScaleTolerance = 1e-9;
  static bool same_scale(double a, double b);

 protected:
  virtual Ciphertext add_raw(const Ciphertext& a, const Ciphertext& b, bool subtract) const = 0;
  virtual Ciphertext negate_raw(const Ciphertext& a) const = 0;
  virtual Ciphertext add_plain_raw(const Ciphertext& a, const Plaintext& pt) const = 0;
  virtual Ciphertext mul_plain_raw(const Ciphertext& a, const Plaintext& pt) const = 0;
  virtual Ciphertext mul_const_raw(const Ciphertext& a, double value, double coeff_scale) const = 0;
  virtual Ciphertext mul_raw(const Ciphertext& a, const Ciphertext& b) const = 0;
  virtual Ciphertext rescale_raw(const Ciphertext& a) const = 0;
  virtual Ciphertext drop_raw(const Ciphertext& a, int level) const = 0;
  virtual std::vector<Ciphertext> rotate_raw(const Ciphertext& a, std::span<const int> normalized_steps) const = 0;

  void check_backend(const Ciphertext& a) const;

 private:
  std::shared_ptr<const CkksContext> ctx_;
};

// Real RLWE backend. Holds only evaluation keys, so it has no way to decrypt.
class CkksEvaluator final : public Evaluator {
 public:
  CkksEvaluator(std::shared_ptr<const CkksContext> ctx, std::shared_ptr<const EvaluationKeys> keys);

  Backend backend() const override { return Backend::kReal; }
  Plaintext encode(std::span<const double> values, int level, double scale) const override;
  std::unique_ptr<LinearAccumulator> make_accumulator(int level, double ct_scale, double coeff_scale) const override;

  // Shortest sequence of keyed steps summing to `step` (mod slots); empty for
  // step 0. Throws KeyError when no composition exists.
  std::vector<int> compose_steps(int step) const;

 protected:
  Ciphertext add_raw(const Ciphertext& a, const Ciphertext& b, bool subtract) const override;
  Ciphertext negate_raw(const Ciphertext& a) const override;
  Ciphertext add_plain_raw(const Ciphertext& a, const Plaintext& pt) const override;
  Ciphertext mul_plain_raw(const Ciphertext& a, const Plaintext& pt) const override;
  Ciphertext mul_const_raw(const Ciphertext& a, double value, double coeff_scale) const override;
  Ciphertext mul_raw(const Ciphertext& a, const Ciphertext& b) const override;
  Ciphertext rescale_raw(const Ciphertext& a) const override;
  Ciphertext drop_raw(const Ciphertext& a, int level) const override;
  std::vector<Ciphertext> rotate_raw(const Ciphertext& a, std::span<const int> normalized_steps) const override;

 private:
  std::shared_ptr<const EvaluationKeys> keys_;
};

// Noise-free backend: ciphertexts carry their slot values in the clear.
class MockEvaluator final : public Evaluator {
 public:
  explicit MockEvaluator(std::shared_ptr<const CkksContext> ctx) : Evaluator(std::move(ctx)) {}

  Backend backend() const override { return Backend::kMock; }
  Plaintext encode(std::span<const double> values, int level, double scale) const override;
  std::unique_ptr<LinearAccumulator> make_accumulator(int level, double ct_scale, double coeff_scale) const override;

 protected:
  Ciphertext add_raw(const Ciphertext& a, const Ciphertext& b, bool subtract) const override;
  Ciphertext negate_raw(const Ciphertext& a) const override;
  Ciphertext add_plain_raw(const Ciphertext& a, const Plaintext& pt) const override;
  Ciphertext mul_plain_raw(const Ciphertext& a, const Plaintext& pt) const override;
  Ciphertext mul_const_raw(const Ciphertext& a, double value, double coeff_scale) const override;
  Ciphertext mul_raw(const Ciphertext& a, const Ciphertext& b) const override;
  Ciphertext rescale_raw(const Ciphertext& a) const override;
  Ciphertext drop_raw(const Ciphertext& a, int level) const override;
  std::vector<Ciphertext> rotate_raw(const Ciphertext& a, std::span<const int> normalized_steps) const override;
};

class Encryptor {
 public:
  virtual ~Encryptor() = default;
  // Fresh ciphertext at the top level and the default scale.
  virtual Ciphertext encrypt(std::span<const double> values, Prng& prng) const = 0;
  virtual const CkksContext& context() const = 0;
};

class CkksEncryptor final : public Encryptor {
 public:
  CkksEncryptor(std::shared_ptr<const CkksContext> ctx, PublicKey pk);
  Ciphertext encrypt(std::span<const double> values, Prng& prng) const override;
  const CkksContext& context() const override { return *ctx_; }

 private:
  std::shared_ptr<const CkksContext> ctx_;
  PublicKey pk_;
};

class MockEncryptor final : public Encryptor {
 public:
  explicit MockEncryptor(std::shared_ptr<const CkksContext> ctx) : ctx_(std::move(ctx)) {}
  Ciphertext encrypt(std::span<const double> values, Prng& prng) const override;
  const CkksContext& context() const override { return *ctx_; }

 private:
  std::shared_ptr<const CkksContext> ctx_;
};

class Decryptor {
 public:
  virtual ~Decryptor() = default;
  virtual SlotVector decrypt(const Ciphertext& ct) const = 0;
};

class CkksDecryptor final : public Decryptor {
 public:
  CkksDecryptor(std::shared_ptr<const CkksContext> ctx, SecretKey sk);
  SlotVector decrypt(const Ciphertext& ct) const override;

 private:
  std::shared_ptr<const CkksContext> ctx_;
  SecretKey sk_;
};

class MockDecryptor final : public Decryptor {
 public:
  SlotVector decrypt(const Ciphertext& ct) const override;
};

}  // namespace lhe::ckks
