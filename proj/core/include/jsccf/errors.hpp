#pragma once

#include <stdexcept>
#include <string>

namespace jsccf {

// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or sizes that do not line up (patch grid, layouts, matrix dims).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Metric inputs of mismatched shape.
class ShapeError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ModeError : public Error {
 public:
  using Error::Error;
};

class SequenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PluginMissing : public Error {
 public:
  using Error::Error;
};

class HookMissing : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace jsccf
