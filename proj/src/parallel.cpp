// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace voxfuse {

void set_num_threads(int n) { omp_set_num_threads(std::max(1, n)); }
int num_threads() { return omp_get_max_threads(); }
int max_threads() { return omp_get_num_procs(); }

}  // namespace voxfuse
