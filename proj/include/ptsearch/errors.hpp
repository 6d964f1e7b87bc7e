// Copyright 2026 The ptsearch Authors.
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

#ifndef PTSEARCH_ERRORS_HPP_
#define PTSEARCH_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptsearch {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (shape mismatch, empty mask, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A dataset directory is missing files or fails validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

// A genome string or genome/flag combination is not a valid architecture.
class InvalidGenome : public Error {
 public:
  using Error::Error;
};

// No mutation is applicable to the given parent.
class MutationError : public Error {
 public:
  using Error::Error;
};

// A recorded tensor operation produced NaN or infinity.
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " +
              what),
        epoch_(epoch) {}

  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace ptsearch

#endif  // PTSEARCH_ERRORS_HPP_
