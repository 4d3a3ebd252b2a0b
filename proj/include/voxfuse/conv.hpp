// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voxfuse/sparse_tensor.hpp"

namespace voxfuse {

inline constexpr int kKernelSize = 3;
inline constexpr int kKernelVolume = 27;
inline constexpr int kPadding = 1;
inline constexpr int kCenterTap = 13;

/// Submanifold outputs exactly the input sites (stride 1). SparseStrided activates every output
/// site a kernel tap can reach from an active input, for stride 1 or 2.
enum class ConvMode : std::uint8_t { Submanifold = 0, SparseStrided = 1 };

/// Tap index of kernel offset (dx, dy, dz), each in [0, 3). Input site = out * stride + offset - 1.
constexpr int tap_index(int dx, int dy, int dz) { return (dx * kKernelSize + dy) * kKernelSize + dz; }
constexpr Coord tap_offset(int tap) { return {tap / 9, (tap / 3) % 3, tap % 3}; }

/// floor((n + 2 * pad - 3) / stride) + 1.
std::int32_t conv_output_extent(std::int32_t n, int stride);
Extent3 conv_output_shape(const Extent3& in, ConvMode mode, int stride);

struct ConvParams {
    int in_channels = 1;
    int out_channels = 1;
    int stride = 1;
    ConvMode mode = ConvMode::Submanifold;
    /// kKernelVolume x in_channels x out_channels, tap-major.
    std::vector<float> weights;

    ConvParams() = default;
    ConvParams(int in, int out, ConvMode m, int s = 1)
        : in_channels(in), out_channels(out), stride(s), mode(m),
          weights(static_cast<std::size_t>(kKernelVolume) * in * out, 0.0f) {}

    float& weight(int tap, int ci, int co) { return weights[(static_cast<std::size_t>(tap) * in_channels + ci) * out_channels + co]; }
    float weight(int tap, int ci, int co) const {
        return weights[(static_cast<std::size_t>(tap) * in_channels + ci) * out_channels + co];
    }
    std::span<const float> tap(int t) const {
        return {weights.data() + static_cast<std::size_t>(t) * in_channels * out_channels,
                static_cast<std::size_t>(in_channels) * out_channels};
    }
    int fan_in() const { return kKernelVolume * in_channels; }

    /// Throws InvalidArgument on bad channel counts, stride, weight size or non-finite weights.
    void validate() const;

    friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

/// Center tap = identity matrix, every other tap zero.
ConvParams identity_conv(int channels, ConvMode mode = ConvMode::Submanifold, int stride = 1);

struct Rule {
    int tap = 0;
    std::int32_t input = 0;
    std::int32_t output = 0;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// Output active set plus (input, output) site pairs grouped by kernel tap.
/// Within a tap, pairs are ordered by output site and every output appears at most once.
struct Rulebook {
    Extent3 out_shape{0, 0, 0};
    std::vector<Coord> out_coords;
    std::array<std::vector<std::pair<std::int32_t, std::int32_t>>, kKernelVolume> pairs;

    std::size_t rule_count() const;
    /// Flattened (tap, input, output) list in tap order.
    std::vector<Rule> rules() const;
};

Rulebook build_rulebook(std::span<const Coord> coords, const Extent3& shape, ConvMode mode, int stride);
inline Rulebook build_rulebook(const SparseTensor& t, const ConvParams& p) {
    return build_rulebook(t.coords(), t.shape(), p.mode, p.stride);
}

/// out[o] = sum over rules of W[tap]^T in[i]; no bias. Throws ShapeError on channel mismatch.
SparseTensor sparse_conv(const SparseTensor& t, const ConvParams& p);
/// Executes a precomputed rulebook, which must have been built from `t`'s active set.
SparseTensor sparse_conv(const SparseTensor& t, const ConvParams& p, const Rulebook& rb);

/// Inference-mode batch normalization parameters.
struct NormParams {
    std::vector<float> gamma;
    std::vector<float> beta;
    std::vector<float> mean;
    std::vector<float> var;
    float eps = 1e-3f;

    /// gamma = 1, beta = 0, mean = 0, var = 1.
    static NormParams identity(std::size_t channels);
    std::size_t channels() const { return gamma.size(); }
    void validate() const;

    friend bool operator==(const NormParams&, const NormParams&) = default;
};

/// y = max(0, gamma * (x - mean) / sqrt(var + eps) + beta), per channel.
SparseTensor norm_relu(const SparseTensor& t, const NormParams& n);

}  // namespace voxfuse
