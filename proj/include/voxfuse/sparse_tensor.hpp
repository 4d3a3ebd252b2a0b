// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <vector>

#include "voxfuse/feature_matrix.hpp"
#include "voxfuse/grid.hpp"

namespace voxfuse {

/// Active sites (sorted, unique, in bounds) with one feature row per site.
class SparseTensor {
public:
    SparseTensor() = default;
    /// Empty tensor with `channels` columns.
    SparseTensor(Extent3 shape, std::size_t channels);
    /// Throws ShapeError when ordering, bounds or row counts are violated.
    SparseTensor(Extent3 shape, std::vector<Coord> coords, FeatureMatrix features);

    /// Requires features on the grid.
    static SparseTensor from_grid(const SparseVoxelGrid& grid);

    const Extent3& shape() const { return shape_; }
    const std::vector<Coord>& coords() const { return coords_; }
    const FeatureMatrix& features() const { return features_; }
    FeatureMatrix& mutable_features() { return features_; }
    std::size_t size() const { return coords_.size(); }
    std::size_t channels() const { return features_.cols; }
    bool empty() const { return coords_.empty(); }

    friend bool operator==(const SparseTensor&, const SparseTensor&) = default;

private:
    Extent3 shape_{0, 0, 0};
    std::vector<Coord> coords_;
    FeatureMatrix features_;
};

inline bool in_shape(const Extent3& shape, const Coord& c) {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < shape[0] && c[1] < shape[1] && c[2] < shape[2];
}

}  // namespace voxfuse
