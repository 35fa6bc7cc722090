#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaitmtl {

// Precondition or argument outside the operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value that parsed but violates a data invariant (negative force, NaN, ...).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trial cannot produce a feature vector (too few cycles, ...).
class TrialRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class JoinError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaitmtl
