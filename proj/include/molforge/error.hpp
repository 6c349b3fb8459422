#pragma once

#include <stdexcept>
#include <string>

namespace molforge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class OperatorError : public Error {
 public:
  using Error::Error;
};

/// A transport-level failure talking to a particular neighbour.
class CommError : public Error {
 public:
  CommError(int peer, const std::string& what)
      : Error("communication error with rank " + std::to_string(peer) + ": " + what),
        peer_(peer) {}
  int peer() const noexcept { return peer_; }

 private:
  int peer_;
};

/// Malformed or unexpected message contents (wrong strip size, bad tag).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values showed up in the state; runs abort on this.
class OverflowError : public SolverError {
 public:
  using SolverError::SolverError;
};

class RunError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SwshError : public Error {
 public:
  using Error::Error;
};

class ArchiveError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};

class MissingIterationError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};

class ShapeMismatchError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};

}  // namespace molforge
