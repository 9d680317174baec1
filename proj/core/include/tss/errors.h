// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace tss {

// Root of every error thrown by the library. The CLI maps the subclasses
// onto its exit codes (data errors -> 2, numerical failures -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf detected, or a numerical routine cannot proceed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition (bad step size, empty tape...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Invalid static configuration, detected at construction time.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input signal unusable: too short, silent, all-zero.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// Room/microphone/source placement is physically invalid.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// A value contract between modules was broken (e.g. a mask outside [0, 1]).
class ContractError : public Error {
 public:
  using Error::Error;
};

// File-level problems: unreadable, malformed, unsupported format.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace tss
