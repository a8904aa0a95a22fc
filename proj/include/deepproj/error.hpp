#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepproj {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary input (bad magic, truncation, count mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A non-finite value appeared during an iterative optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class DisconnectedGraphError : public Error {
 public:
  explicit DisconnectedGraphError(std::vector<std::size_t> component_sizes);
  const std::vector<std::size_t>& component_sizes() const noexcept {
    return component_sizes_;
  }

 private:
  std::vector<std::size_t> component_sizes_;
};

}  // namespace deepproj
