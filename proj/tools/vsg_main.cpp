// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/cli.hpp"

int main(int argc, char** argv) { return vsg::run_cli(argc, argv); }
