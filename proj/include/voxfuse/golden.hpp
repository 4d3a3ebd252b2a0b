// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxfuse/codec.hpp"
#include "voxfuse/rng.hpp"
#include "voxfuse/sparse_tensor.hpp"

namespace voxfuse::golden {

/// Random wire-exact message on a small random grid. Mean-feature messages carry F = 4 features.
codec::VoxelGridMessage random_message(Rng& rng, codec::Mode mode, std::size_t max_voxels = 64);

/// Each site of `shape` is active with probability `density`; features uniform in [-1, 1).
SparseTensor random_tensor(Rng& rng, const Extent3& shape, std::size_t channels, double density);

/// Ego cloud of the seed-`seed` two-vehicle synthetic scene, at PCF1 (f32) precision.
PointCloud synthetic_cloud(std::uint64_t seed);

struct Artifact {
    std::string name;
    std::vector<std::uint8_t> bytes;
};

/// Byte-stable reference outputs checked into tests/golden.
std::vector<Artifact> build_artifacts();

}  // namespace voxfuse::golden
