// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace vsg {

// Exit-code families for the command-line surface. Every vsg::Error maps to
// exactly one family so scripted callers can branch on the process status.
enum class ErrorFamily : int {
  usage = 2,  // bad flags or argument values
  io = 3,     // missing, unreadable or unwritable files
  model = 4,  // backend or head loading and runtime failures
  data = 5,   // malformed input bytes and containers
};

enum class Err {
  MalformedContainer,
  UnsupportedEncoding,
  EmptyInput,
  WrongRate,
  WrongLength,
  BackendLoadFailure,
  ShapeMismatch,
  TranscriptionUnsupported,
  EmptySequence,
  NonFiniteInput,
  OutOfRange,
  EmptyClass,
  NonFiniteLoss,
  TooFewSamples,
  LengthMismatch,
  EmptyData,
  SingleClass,
  IoFailure,
};

const char* err_name(Err kind);
ErrorFamily err_family(Err kind);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& message);
  Err kind() const { return kind_; }
  ErrorFamily family() const { return err_family(kind_); }
  int exit_code() const { return static_cast<int>(family()); }

 private:
  Err kind_;
};

[[noreturn]] inline void raise(Err kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace vsg
