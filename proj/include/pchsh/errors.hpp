// Copyright 2026 The pchsh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace pchsh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical result failed an internal consistency check
/// (residual imaginary part, normalization, non-convergence).
class NumericalConsistency : public Error {
 public:
  using Error::Error;
};

/// b and b' are parallel or antiparallel, so (m, m', theta_b) is undefined.
class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

/// A state file could not be read or parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A parsed state violates a DensityMatrix invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An output file could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pchsh
