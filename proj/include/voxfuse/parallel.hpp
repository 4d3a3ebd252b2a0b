// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

namespace voxfuse {

/// Thread count used by the sparse kernels. Results never depend on it.
void set_num_threads(int n);
int num_threads();
int max_threads();

}  // namespace voxfuse
