// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/tensor/layers.h"

#include <cmath>
#include <string>

#include "lhe/common/error.h"

namespace lhe::tensor {
namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ShapeError(std::string(what) + " contains a non-finite value");
}

}  // namespace

void ConvWeights::validate() const {
  if (stride != 1 && stride != 2) throw ShapeError("conv stride must be 1 or 2");
  if (kernel_h != kernel_w || (kernel_h != 1 && kernel_h != 3)) throw ShapeError("conv kernel must be 1x1 or 3x3");
  if (out_channels == 0 || in_channels == 0) throw ShapeError("conv needs at least one channel");
  if (weights.size() != static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w) {
    throw ShapeError("conv weight count does not match its shape");
  }
  if (bias.size() != out_channels) throw ShapeError("conv bias length does not match out_channels");
  check_finite(weights, "conv weights");
  check_finite(bias, "conv bias");
}

ActivationCoeffs ActivationCoeffs::polyact(double a, double b, double c) {
  ActivationCoeffs k;
  k.kind = Kind::kPolyact;
  k.a = a;
  k.b = b;
  k.c = c;
  return k;
}

ActivationCoeffs ActivationCoeffs::approx_sigmoid(double alpha, double beta, double gamma, double d) {
  ActivationCoeffs k;
  k.kind = Kind::kApproxSigmoid;
  k.alpha = alpha;
  k.beta = beta;
  k.gamma = gamma;
  k.d = d;
  return k;
}

double ActivationCoeffs::eval(double x) const {
  if (kind == Kind::kPolyact) return ((a * (x * x)) + b * x) + c;
  return ((alpha * ((x * x) * x) + beta * (x * x)) + gamma * x) + d;
}

void ActivationCoeffs::validate() const {
  for (double v : {a, b, c, alpha, beta, gamma, d})
    if (!std::isfinite(v)) throw ShapeError("activation coefficient is not finite");
}

void LinearWeights::validate() const {
  if (out_features == 0 || in_features == 0) throw ShapeError("linear layer needs non-zero dimensions");
  if (weights.size() != static_cast<std::size_t>(out_features) * in_features) {
    throw ShapeError("linear weight count does not match its shape");
  }
  if (bias.size() != out_features) throw ShapeError("linear bias length does not match out_features");
  check_finite(weights, "linear weights");
  check_finite(bias, "linear bias");
}

void SeWeights::validate() const {
  if (hidden == 0 || channels % hidden != 0) throw ShapeError("SE reduction ratio must divide the channel count");
  fc1.validate();
  fc2.validate();
  if (fc1.in_features != channels || fc1.out_features != hidden) throw ShapeError("SE fc1 shape mismatch");
  if (fc2.in_features != hidden || fc2.out_features != channels) throw ShapeError("SE fc2 shape mismatch");
  if (act.kind != ActivationCoeffs::Kind::kPolyact) throw ShapeError("SE activation must be polyact");
  if (gate.kind != ActivationCoeffs::Kind::kApproxSigmoid) throw ShapeError("SE gate must be approx_sigmoid");
  act.validate();
  gate.validate();
}

}  // namespace lhe::tensor
