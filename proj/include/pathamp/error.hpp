#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathamp {

// Invalid input to a module operation (dimension mismatch, non-Hermitian
// generator, index out of range, ...). `diagnostic()` carries the offending
// magnitude when there is one, NaN otherwise.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what, double diagnostic = std::nan(""))
      : std::invalid_argument(what), diagnostic_(diagnostic) {}
  double diagnostic() const noexcept { return diagnostic_; }

 private:
  double diagnostic_;
};

class DimensionError : public InvalidArgument {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t got)
      : InvalidArgument(what + " (expected dimension " + std::to_string(expected) +
                        ", got " + std::to_string(got) + ")") {}
};

// A well-formed request that cannot be carried out numerically: rank-deficient
// designs, impossible post-selection, undefined weak values.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double diagnostic = std::nan(""))
      : std::runtime_error(what), diagnostic_(diagnostic) {}
  double diagnostic() const noexcept { return diagnostic_; }

 private:
  double diagnostic_;
};

class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, double sigma_min)
      : NumericalError(what, sigma_min) {}
  double sigma_min() const noexcept { return diagnostic(); }
};

class PostselectionError : public NumericalError {
 public:
  PostselectionError(const std::string& what, double denominator)
      : NumericalError(what, denominator) {}
  double denominator() const noexcept { return diagnostic(); }
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathamp
