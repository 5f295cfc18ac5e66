// xvalign/error.h

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVALIGN_ERROR_H_
#define XVALIGN_ERROR_H_

#include <stdexcept>
#include <string>

namespace xvalign {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data violates an operation's precondition (too short, empty, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a degenerate quantity (zero norm, zero variance).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() on a non-scalar root.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for this configuration.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace xvalign

#endif  // XVALIGN_ERROR_H_
