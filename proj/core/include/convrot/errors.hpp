#pragma once

#include <stdexcept>
#include <string>

namespace convrot {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix order / transform length does not satisfy the construction's
// constraint (power of two, power of four, supported maximum, ...).
class InvalidOrderError : public Error {
 public:
  using Error::Error;
};

// Non-finite input, out-of-range parameter, non-positive scale, code
// outside the representable range.
class InvalidValueError : public Error {
 public:
  using Error::Error;
};

// Mismatched matrix shapes, including group-size divisibility failures.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Integer accumulator capacity precondition would be violated.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed tensor file. `offset` is the byte position of the problem.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

// Malformed policy file. `rule_index` is -1 when the error is not tied to a
// specific rule.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int rule_index)
      : Error(rule_index >= 0
                  ? what + " (rule " + std::to_string(rule_index) + ")"
                  : what),
        rule_index_(rule_index) {}

  int rule_index() const { return rule_index_; }

 private:
  int rule_index_;
};

}  // namespace convrot
