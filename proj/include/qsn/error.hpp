// Copyright 2026 The QSN Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qsn {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch, index out of range, or a dimension above the configured cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operator that was required to be Hermitian is not.
class HermiticityError : public Error {
 public:
  using Error::Error;
};

/// A state violates normalization, trace or positivity constraints.
class StateError : public Error {
 public:
  using Error::Error;
};

/// The commuting-generator construction was requested for non-commuting generators.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// An argument fails a documented precondition (integrality, normalization, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is singular at the configured rank tolerance.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qsn
