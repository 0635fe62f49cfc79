// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

namespace vsg {

// Full command-line surface: classify, serve, train-head, eval, sweep, cv,
// bench. Returns the process exit code (0 on success, then the ErrorFamily
// code of whatever failed).
int run_cli(int argc, char** argv);

}  // namespace vsg
