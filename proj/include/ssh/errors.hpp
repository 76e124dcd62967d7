#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssh {

// Root of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes do not line up (matmul, mask vs spectrum, gradient vs layer, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A computation produced or was handed a NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// More frequencies requested than the spectrum holds.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition (rank range, list length, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed config or matrix file. Carries the byte offset when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::int64_t offset = -1)
      : Error(offset >= 0 ? what + " (at byte offset " + std::to_string(offset) + ")" : what),
        offset_(offset) {}
  std::int64_t offset() const noexcept { return offset_; }

 private:
  std::int64_t offset_;
};

// Training loss kept rising; the run was aborted.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class CheckpointMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointTruncatedError : public CheckpointError {
 public:
  CheckpointTruncatedError(const std::string& section)
      : CheckpointError("checkpoint truncated: missing section '" + section + "'"),
        section_(section) {}
  const std::string& section() const noexcept { return section_; }

 private:
  std::string section_;
};

class CheckpointDigestError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace ssh
