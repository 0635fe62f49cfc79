// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/types.hpp"

namespace vsg {

const char* label_name(Label l) {
  return l == Label::MALICIOUS ? "MALICIOUS" : "SAFE";
}

}  // namespace vsg
