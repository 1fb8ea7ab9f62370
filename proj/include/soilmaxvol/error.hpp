#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace soilmaxvol {

/// Base class for every failure raised by the library. `kind()` is a short
/// stable token ("RankDeficient", "ParseError", ...) used by the CLI and the
/// Python bindings.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class RankDeficient : public Error {
public:
  explicit RankDeficient(const std::string& what) : Error("RankDeficient", what) {}
};

class InsufficientPoints : public Error {
public:
  InsufficientPoints(std::size_t achieved, std::size_t requested)
      : Error("InsufficientPoints",
              "distance constraint exhausted candidates after selecting " +
                  std::to_string(achieved) + " of " + std::to_string(requested) + " points"),
        achieved_(achieved),
        requested_(requested) {}

  std::size_t achieved() const noexcept { return achieved_; }
  std::size_t requested() const noexcept { return requested_; }

private:
  std::size_t achieved_;
  std::size_t requested_;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class OutOfBounds : public Error {
public:
  explicit OutOfBounds(const std::string& what) : Error("OutOfBounds", what) {}
};

class TooSmall : public Error {
public:
  explicit TooSmall(const std::string& what) : Error("TooSmall", what) {}
};

class CycleDetected : public Error {
public:
  explicit CycleDetected(const std::string& what) : Error("CycleDetected", what) {}
};

class ShapeMismatch : public Error {
public:
  explicit ShapeMismatch(const std::string& what) : Error("ShapeMismatch", what) {}
};

class DegenerateSpec : public Error {
public:
  DegenerateSpec(std::map<int, std::size_t> histogram, const std::string& what)
      : Error("DegenerateSpec", what), histogram_(std::move(histogram)) {}

  /// Pixel count per class label, including the empty ones.
  const std::map<int, std::size_t>& histogram() const noexcept { return histogram_; }

private:
  std::map<int, std::size_t> histogram_;
};

class EmptyTraining : public Error {
public:
  explicit EmptyTraining(const std::string& what) : Error("EmptyTraining", what) {}
};

class DimensionMismatch : public Error {
public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class LengthMismatch : public Error {
public:
  explicit LengthMismatch(const std::string& what) : Error("LengthMismatch", what) {}
};

class EmptyInput : public Error {
public:
  explicit EmptyInput(const std::string& what) : Error("Empty", what) {}
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

}  // namespace soilmaxvol
