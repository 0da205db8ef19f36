#pragma once

#include <stdexcept>
#include <string>

namespace finmart {

// Base for all library errors so callers can catch the whole family at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : Error {
  using Error::Error;
};

// Input text could not be parsed; carries line/column context in the message.
struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& what, int line_, int column_)
      : Error("parse error at line " + std::to_string(line_) + ", column " +
              std::to_string(column_) + ": " + what),
        line(line_),
        column(column_) {}
};

struct BadParams : Error {
  using Error::Error;
};

struct NotAdapted : ValidationError {
  using ValidationError::ValidationError;
};

struct NotPredictable : ValidationError {
  using ValidationError::ValidationError;
};

struct NotSelfFinancing : ValidationError {
  using ValidationError::ValidationError;
};

struct NotSubfiltration : ValidationError {
  using ValidationError::ValidationError;
};

struct NonTrivialStart : ValidationError {
  using ValidationError::ValidationError;
};

struct NotEquivalent : ValidationError {
  using ValidationError::ValidationError;
};

struct NotEmm : ValidationError {
  using ValidationError::ValidationError;
};

struct NotMeasurable : ValidationError {
  using ValidationError::ValidationError;
};

struct NotReplicable : Error {
  using Error::Error;
};

struct ArbitrageUnboundedGrowth : Error {
  using Error::Error;
};

struct Degenerate : Error {
  using Error::Error;
};

}  // namespace finmart
