#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace linseq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rounded exponent left [-100, 100], or the value is not finite.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Triplet outside the range a scheme (or its vocabulary) can express.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Malformed token sequence. `position` is the index of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at token " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class Singular : public Error {
 public:
  using Error::Error;
};

class ResampleExhausted : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace linseq
