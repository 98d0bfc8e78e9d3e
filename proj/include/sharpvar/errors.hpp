//
// Copyright 2026 The sharpvar Authors
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
//

#ifndef SHARPVAR_ERRORS_HPP
#define SHARPVAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sharpvar {

// Error taxonomy. The CLI maps these to process exit codes:
//   ParseError -> 2, DegenerateDesignError (and subtypes) -> 3,
//   WeakInstrumentError -> 4.

// Invalid argument to a mathematical operation (empty sequence, u outside
// (0,1], mass deficit, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// The design cannot support the requested estimator: an empty arm, a stratum
// missing from an arm, a rank-deficient regression, a degenerate lambda.
class DegenerateDesignError : public std::runtime_error {
 public:
  explicit DegenerateDesignError(const std::string& what)
      : std::runtime_error(what) {}
};

// Least-squares failure (rank-deficient design matrix).
class RegressionError : public DegenerateDesignError {
 public:
  explicit RegressionError(const std::string& what)
      : DegenerateDesignError(what) {}
};

// Estimated (or true) complier share too close to zero.
class WeakInstrumentError : public std::runtime_error {
 public:
  explicit WeakInstrumentError(const std::string& what)
      : std::runtime_error(what) {}
};

// Data contradict the instrument assumptions (a defier, or an outcome change
// for a unit whose treatment uptake cannot change).
class AssumptionViolationError : public DegenerateDesignError {
 public:
  explicit AssumptionViolationError(const std::string& what)
      : DegenerateDesignError(what) {}
};

// Malformed input file, dataset schema, or study configuration.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sharpvar

#endif  // SHARPVAR_ERRORS_HPP
