// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/sparse_tensor.hpp"

#include "voxfuse/errors.hpp"

namespace voxfuse {

SparseTensor::SparseTensor(Extent3 shape, std::size_t channels) : shape_(shape), features_(0, channels) {}

SparseTensor::SparseTensor(Extent3 shape, std::vector<Coord> coords, FeatureMatrix features)
    : shape_(shape), coords_(std::move(coords)), features_(std::move(features)) {
    if (features_.rows != coords_.size()) throw ShapeError("feature rows do not match active site count");
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (!in_shape(shape_, coords_[i])) throw ShapeError("active site outside tensor shape");
        if (i > 0 && !(coords_[i - 1] < coords_[i])) throw ShapeError("active sites must be sorted and unique");
    }
}

SparseTensor SparseTensor::from_grid(const SparseVoxelGrid& grid) {
    if (!grid.features()) throw ShapeError("grid has no voxel features");
    return SparseTensor(grid.spec().dims, grid.coords(), *grid.features());
}

}  // namespace voxfuse
