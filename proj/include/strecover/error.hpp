#ifndef STRECOVER_ERROR_HPP_
#define STRECOVER_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strecover {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition (bad rate, k out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Index outside the matrix / graph / slot range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Operands with inconsistent dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateEntryError : public Error {
 public:
  using Error::Error;
};

// A kNN neighbour sits at distance zero, so 1/p is undefined.
class DegenerateDistanceError : public Error {
 public:
  using Error::Error;
};

// File system failure (unreadable input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced non-finite factors.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t epoch, const std::string& context = "")
      : Error((context.empty() ? "" : context + ": ") + "training diverged at epoch " +
              std::to_string(epoch) +
              " (non-finite factors); try a smaller learning rate"),
        epoch_(epoch) {}

  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace strecover

#endif  // STRECOVER_ERROR_HPP_
