// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cli.h"

int main(int argc, char** argv) { return tss::cli::run(argc, argv); }
