#pragma once

#include <stdexcept>
#include <string>

namespace eeg {

enum class ErrorKind {
  InvalidArgument,  // caller broke a precondition (bad alpha, empty input, ...)
  ShapeMismatch,    // (n_layers, dim) disagree between two objects
  Degenerate,       // zero-norm vector or rank-deficient data
  EmptyClass,       // a class needed for fitting has no members
  DataFormat,       // malformed file or frame
  Io,               // filesystem / socket failure
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::EmptyClass: return "empty_class";
    case ErrorKind::DataFormat: return "data_format";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eeg
