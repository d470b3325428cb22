#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace envmorph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents do not match the expected format.
class CorruptFile : public Error {
 public:
  using Error::Error;
};

class CorruptCheckpoint : public CorruptFile {
 public:
  using CorruptFile::CorruptFile;
};

/// An impulse-train parameter set violates its geometric constraints.
class InvalidSpec : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class GenerationExhausted : public Error {
 public:
  GenerationExhausted(const std::string& what, std::size_t index = 0)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Non-finite values showed up in a forward or backward pass.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class InvalidMap : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class CheckpointMissing : public IoError {
 public:
  using IoError::IoError;
};

class TemplateMissing : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidExpectation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace envmorph
