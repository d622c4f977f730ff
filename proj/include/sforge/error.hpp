// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sforge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed a value outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: unknown adapter, bad RenderSpec, missing asset.
/// The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input stream. `record_index` is 0-based; npos when the failure
/// is not attributable to one record.
class ParseError : public Error {
 public:
  ParseError(std::size_t record_index, const std::string& what)
      : Error(what), record_index_(record_index) {}

  std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

/// A persisted artifact or an in-memory aggregate violates its invariants.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A mix quota asks for more entries than a source holds.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A training record points at a media file that does not exist.
class DanglingReferenceError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values in an iterative solver.
class NumericalError : public Error {
 public:
  NumericalError(int iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Remote service failed after retries, or returned an unusable body.
class ProviderError : public Error {
 public:
  using Error::Error;
};

}  // namespace sforge
