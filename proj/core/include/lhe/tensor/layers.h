// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace lhe::tensor {

// Weights are [out][in][kh][kw]; padding is (k - 1) / 2 on every side.
struct ConvWeights {
  std::uint32_t out_channels = 0, in_channels = 0, kernel_h = 0, kernel_w = 0, stride = 1;
  std::vector<double> weights;
  std::vector<double> bias;
  bool bn_folded = false;

  double w(std::uint32_t o, std::uint32_t i, std::uint32_t y, std::uint32_t x) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + y) * kernel_w + x];
  }
  double& w(std::uint32_t o, std::uint32_t i, std::uint32_t y, std::uint32_t x) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + y) * kernel_w + x];
  }
  // Throws ShapeError.
  void validate() const;
  bool operator==(const ConvWeights&) const = default;
};

struct ActivationCoeffs {
  enum class Kind { kPolyact, kApproxSigmoid };
  Kind kind = Kind::kPolyact;
  double a = 0, b = 1, c = 0;                   // a x^2 + b x + c
  double alpha = 0, beta = 0, gamma = 0, d = 0;  // alpha x^3 + beta x^2 + gamma x + d

  static ActivationCoeffs polyact(double a, double b, double c);
  static ActivationCoeffs approx_sigmoid(double alpha, double beta, double gamma, double d);
  double eval(double x) const;
  void validate() const;
  bool operator==(const ActivationCoeffs&) const = default;
};

// Dense layer; weights are [out][in].
struct LinearWeights {
  std::uint32_t out_features = 0, in_features = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double w(std::uint32_t o, std::uint32_t i) const { return weights[static_cast<std::size_t>(o) * in_features + i]; }
  void validate() const;
  bool operator==(const LinearWeights&) const = default;
};

// Squeeze-and-excitation: s = mean(x), g = gate(fc2 act(fc1 s + b1) + b2),
// out = x * g per channel. fc1 is [hidden][channels], fc2 [channels][hidden].
struct SeWeights {
  std::uint32_t channels = 0, hidden = 0;
  LinearWeights fc1, fc2;
  ActivationCoeffs act = ActivationCoeffs::polyact(0, 1, 0);
  ActivationCoeffs gate = ActivationCoeffs::approx_sigmoid(0, 0, 0, 1);

  void validate() const;
  bool operator==(const SeWeights&) const = default;
};

}  // namespace lhe::tensor
