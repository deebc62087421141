// Copyright 2026 The Demix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEMIX_ERRORS_HPP
#define DEMIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace demix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or index disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

/// Non-finite values or solver divergence. `iteration` is -1 when the
/// failure is not tied to an iteration counter.
struct NumericError : Error {
  explicit NumericError(const std::string& what, long iteration = -1)
      : Error(what), iteration(iteration) {}
  long iteration;
};

/// A vector that must be unit-normalized is not.
struct NormalizationError : Error {
  using Error::Error;
};

/// Random partition search exhausted its attempts. Carries the smallest
/// max-deviation seen, which signals whether Q was close to sufficient.
struct ConstructionError : Error {
  ConstructionError(const std::string& what, double best_nu)
      : Error(what), best_nu(best_nu) {}
  double best_nu;
};

/// A frame operator T_{i,p} is singular or near-singular.
struct PartitionDegeneracyError : Error {
  using Error::Error;
};

/// A tangent-frame basis failed its orthonormality check.
struct FrameError : Error {
  using Error::Error;
};

/// Relative error against a zero reference block.
struct UndefinedRatioError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace demix

#endif  // DEMIX_ERRORS_HPP
