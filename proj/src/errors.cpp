// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/errors.hpp"

namespace vsg {

const char* err_name(Err kind) {
  switch (kind) {
    case Err::MalformedContainer: return "MalformedContainer";
    case Err::UnsupportedEncoding: return "UnsupportedEncoding";
    case Err::EmptyInput: return "EmptyInput";
    case Err::WrongRate: return "WrongRate";
    case Err::WrongLength: return "WrongLength";
    case Err::BackendLoadFailure: return "BackendLoadFailure";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::TranscriptionUnsupported: return "TranscriptionUnsupported";
    case Err::EmptySequence: return "EmptySequence";
    case Err::NonFiniteInput: return "NonFiniteInput";
    case Err::OutOfRange: return "OutOfRange";
    case Err::EmptyClass: return "EmptyClass";
    case Err::NonFiniteLoss: return "NonFiniteLoss";
    case Err::TooFewSamples: return "TooFewSamples";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::EmptyData: return "EmptyData";
    case Err::SingleClass: return "SingleClass";
    case Err::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

ErrorFamily err_family(Err kind) {
  switch (kind) {
    case Err::OutOfRange:
      return ErrorFamily::usage;
    case Err::IoFailure:
      return ErrorFamily::io;
    case Err::BackendLoadFailure:
    case Err::ShapeMismatch:
    case Err::TranscriptionUnsupported:
    case Err::NonFiniteLoss:
      return ErrorFamily::model;
    default:
      return ErrorFamily::data;
  }
}

Error::Error(Err kind, const std::string& message)
    : std::runtime_error(std::string(err_name(kind)) + ": " + message), kind_(kind) {}

}  // namespace vsg
