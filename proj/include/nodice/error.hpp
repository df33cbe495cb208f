#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nodice {

struct SourcePos {
  std::uint32_t line = 0;
  std::uint32_t column = 0;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
  friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
  std::string to_string() const;
};

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax, type and desugaring errors in a program, with a source position.
class ProgramError : public Error {
 public:
  ProgramError(SourcePos pos, const std::string& message)
      : Error(pos.to_string() + ": " + message), pos_(pos), message_(message) {}

  SourcePos pos() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

/// Misuse of the decision-diagram store (bad level, foreign reference, ...).
class StoreError : public Error {
 public:
  using Error::Error;
};

/// Structural problems with an MDP (cycles, malformed files, bad rows).
class MdpError : public Error {
 public:
  using Error::Error;
};

/// A resource limit (oracle flip cap, enumeration cap, deadline) was hit.
class LimitError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public LimitError {
 public:
  TimeoutError() : LimitError("deadline exceeded") {}
};

}  // namespace nodice
