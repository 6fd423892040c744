// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lhe {

// Base class for every error the library raises. Subclasses map onto the CLI
// exit codes (validation 2, depth/planning 3, I/O 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scheme parameters; the message names the violated invariant.
class ParamError : public Error {
 public:
  using Error::Error;
};

// A vector or feature map does not fit in the available slots.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Multiplicative depth exhausted or levels that cannot be aligned.
class DepthError : public Error {
 public:
  using Error::Error;
};

// Missing rotation key (and the step is not composable from existing keys).
class KeyError : public Error {
 public:
  using Error::Error;
};

// Tensor geometry or layer-chain mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// The level planner cannot segment the graph into feasible chunks.
class PlanError : public Error {
 public:
  using Error::Error;
};

// Batch-norm statistics missing or inconsistent with the preceding conv.
class FoldError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file / message, checksum failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Weight-bundle resolution failure (missing blob, shape mismatch, checksum).
class LoadError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Metric is undefined for the given inputs (e.g. no class with both labels).
class MetricError : public Error {
 public:
  using Error::Error;
};

// File system failure: missing, unreadable or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lhe
