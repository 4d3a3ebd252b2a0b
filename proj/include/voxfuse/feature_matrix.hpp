// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

namespace voxfuse {

/// Dense row-major float matrix; one row per active site.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    float& at(std::size_t i, std::size_t c) { return data[i * cols + c]; }
    float at(std::size_t i, std::size_t c) const { return data[i * cols + c]; }

    /// Bitwise comparison; distinguishes -0.0 from +0.0.
    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
        return a.rows == b.rows && a.cols == b.cols &&
               (a.data.empty() || std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
    }
};

}  // namespace voxfuse
