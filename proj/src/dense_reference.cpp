// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/dense_reference.hpp"

#include <cmath>

#include "voxfuse/errors.hpp"

namespace voxfuse {

DenseVolume densify(const SparseTensor& t) {
    DenseVolume d(t.shape(), t.channels());
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t c = 0; c < t.channels(); ++c) d.at(t.coords()[i], c) = t.features().at(i, c);
    return d;
}

DenseVolume dense_oracle(const SparseTensor& t, const ConvParams& p) {
    if (static_cast<int>(t.channels()) != p.in_channels) throw ShapeError("input channels do not match convolution");
    const DenseVolume in = densify(t);
    const Extent3 out_shape = conv_output_shape(t.shape(), ConvMode::SparseStrided, p.stride);
    DenseVolume out(out_shape, static_cast<std::size_t>(p.out_channels));
    for (int ox = 0; ox < out_shape[0]; ++ox)
        for (int oy = 0; oy < out_shape[1]; ++oy)
            for (int oz = 0; oz < out_shape[2]; ++oz)
                for (int kx = 0; kx < 3; ++kx)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kz = 0; kz < 3; ++kz) {
                            const Coord ip{ox * p.stride + kx - 1, oy * p.stride + ky - 1, oz * p.stride + kz - 1};
                            if (!in_shape(t.shape(), ip)) continue;
                            const int tap = tap_index(kx, ky, kz);
                            for (int ci = 0; ci < p.in_channels; ++ci) {
                                const double v = in.at(ip, static_cast<std::size_t>(ci));
                                if (v == 0.0) continue;
                                for (int co = 0; co < p.out_channels; ++co)
                                    out.at({ox, oy, oz}, static_cast<std::size_t>(co)) += v * p.weight(tap, ci, co);
                            }
                        }
    return out;
}

std::size_t dense_reachable_pairs(const SparseTensor& t, ConvMode mode, int stride) {
    FeatureMatrix ones(t.size(), 1, 1.0f);
    const SparseTensor indicator(t.shape(), t.coords(), std::move(ones));
    ConvParams all_ones(1, 1, ConvMode::SparseStrided, stride);
    std::fill(all_ones.weights.begin(), all_ones.weights.end(), 1.0f);
    const DenseVolume counts = dense_oracle(indicator, all_ones);

    double total = 0.0;
    if (mode == ConvMode::Submanifold) {
        for (const Coord& c : t.coords()) total += counts.at(c, 0);
    } else {
        for (double v : counts.data) total += v;
    }
    return static_cast<std::size_t>(std::llround(total));
}

}  // namespace voxfuse
