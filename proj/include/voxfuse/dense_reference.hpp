// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <vector>

#include "voxfuse/conv.hpp"

namespace voxfuse {

/// Dense 4-D array indexed [x][y][z][c], double precision.
struct DenseVolume {
    Extent3 shape{0, 0, 0};
    std::size_t channels = 0;
    std::vector<double> data;

    DenseVolume(Extent3 s, std::size_t c)
        : shape(s), channels(c), data(static_cast<std::size_t>(s[0]) * s[1] * s[2] * c, 0.0) {}

    std::size_t offset(const Coord& p, std::size_t c) const {
        return ((static_cast<std::size_t>(p[0]) * shape[1] + p[1]) * shape[2] + p[2]) * channels + c;
    }
    double& at(const Coord& p, std::size_t c) { return data[offset(p, c)]; }
    double at(const Coord& p, std::size_t c) const { return data[offset(p, c)]; }
};

/// Inactive sites are zero. Test-scale only.
DenseVolume densify(const SparseTensor& t);

/// Zero-padded strided 3x3x3 convolution over the densified input, evaluated at every output
/// position with straightforward nested loops. Mode only affects which sites callers compare.
DenseVolume dense_oracle(const SparseTensor& t, const ConvParams& p);

/// Number of (output, tap) pairs whose tap lands on an active input, computed by convolving the
/// occupancy indicator with an all-ones kernel. Submanifold counts only outputs at active sites.
std::size_t dense_reachable_pairs(const SparseTensor& t, ConvMode mode, int stride);

}  // namespace voxfuse
