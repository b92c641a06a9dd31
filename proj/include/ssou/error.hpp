// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssou {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Iteration caps, quadrature failures, missing root brackets.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Explicit Euler is unstable for dt * kappa >= 2.
class StabilityError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class InsufficientStatistics : public Error {
public:
  InsufficientStatistics(std::size_t count, std::size_t required)
      : Error("insufficient statistics: " + std::to_string(count) +
              " samples satisfy the conditioning, need " +
              std::to_string(required)),
        count_(count) {}

  std::size_t count() const noexcept { return count_; }

private:
  std::size_t count_;
};

class TrainingFailure : public Error {
public:
  TrainingFailure(int epoch, const std::string& what)
      : Error("training failed in epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

}  // namespace ssou
