// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxfuse/conv.hpp"
#include "voxfuse/grid.hpp"

namespace voxfuse {

/// The ego-only local stream plus the three collective resolution streams.
enum class Stream : std::uint8_t { Local = 0, High = 1, Medium = 2, Low = 3 };
inline constexpr std::array<Stream, 4> kAllStreams{Stream::Local, Stream::High, Stream::Medium, Stream::Low};

std::string_view to_string(Stream s);
/// Local shares the high resolution grid.
Level stream_level(Stream s);

inline constexpr std::array<int, 4> kBlockChannels{16, 32, 64, 64};
inline constexpr int kFinalChannels = 64;
inline constexpr int kFusedChannels = 2 * kFinalChannels;

/// Stride of the leading sparse convolution of each block.
/// Local/High halve at blocks 2-4, Medium at 3-4, Low at 4 only.
std::array<int, 4> stride_schedule(Stream s);

struct ConvLayer {
    ConvParams conv;
    NormParams norm;

    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

/// A sparse convolution (strided or stride 1) followed by two submanifold convolutions,
/// each followed by normalization and ReLU.
struct ConvBlockParams {
    std::array<ConvLayer, 3> layers;

    int in_channels() const { return layers[0].conv.in_channels; }
    int out_channels() const { return layers[0].conv.out_channels; }
    int stride() const { return layers[0].conv.stride; }

    friend bool operator==(const ConvBlockParams&, const ConvBlockParams&) = default;
};

/// Zero weights and identity normalization with the block's channel chaining.
ConvBlockParams make_block(int in_channels, int out_channels, int stride);

struct BackboneWeights {
    std::uint64_t seed = 0;
    int in_channels = 3;
    /// Indexed by Stream.
    std::array<std::array<ConvBlockParams, 4>, 4> streams;
    ConvBlockParams collective_final;
    ConvBlockParams local_final;

    const std::array<ConvBlockParams, 4>& stream(Stream s) const { return streams[static_cast<std::size_t>(s)]; }
    /// Every layer in serialization order: streams, blocks, layers, then the two final blocks.
    std::vector<const ConvLayer*> layers() const;
    std::vector<ConvLayer*> mutable_layers();

    friend bool operator==(const BackboneWeights&, const BackboneWeights&) = default;
};

/// Architecture with zero weights for `in_channels` input features.
BackboneWeights make_architecture(int in_channels = 3);
/// Uniform weights in +-sqrt(6 / fan_in) from mt19937_64(seed); identity normalization.
BackboneWeights init_weights(std::uint64_t seed, int in_channels = 3);

/// "MRW1" container: magic, u32 version, u64 seed, u32 in_channels, u32 layer count, a manifest of
/// (u8 mode, u8 stride, u16 0, u32 in, u32 out) per layer, then per layer the weight tensor and
/// gamma, beta, mean, var, eps as raw f32.
std::vector<std::uint8_t> encode_weights(const BackboneWeights& w);
BackboneWeights decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const BackboneWeights& w, const std::string& path);
BackboneWeights load_weights(const std::string& path);

SparseTensor run_block(const SparseTensor& input, const ConvBlockParams& block);

using StreamOutputs = std::array<SparseTensor, 4>;

/// Cross-stream inputs: after_block[b], when set, is scatter-maxed with block b's output before it
/// feeds block b + 1. The returned outputs are the unfused block outputs.
struct StreamTaps {
    std::array<const SparseTensor*, 4> after_block{};
};

/// Wall-clock milliseconds per block, including the junction scatter after it.
using BlockTimings = std::array<double, 4>;

StreamOutputs run_stream(const SparseTensor& input, Stream s, const BackboneWeights& w, const StreamTaps& taps = {},
                         BlockTimings* timings = nullptr);
/// Throws ShapeError unless the grid spec is the stream's spec in `volume` and it carries features
/// matching the weights' input channels.
StreamOutputs run_stream(const SparseVoxelGrid& input, Stream s, const BackboneWeights& w, const Volume& volume,
                         const StreamTaps& taps = {}, BlockTimings* timings = nullptr);

enum class FeatureKind : std::uint8_t { Center, Mean };
inline int feature_channels(FeatureKind k) { return k == FeatureKind::Center ? 3 : 4; }

/// A received grid, already regridded into the ego frame at `level`.
struct CollectiveInput {
    Level level = Level::High;
    SparseVoxelGrid grid;
};

/// Dense bird's-eye-view map stored [x][y][channel]; channel = z * C + c.
struct BevMap {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::int32_t channels = 0;
    std::vector<float> data;
    GridSpec spec;
    std::uint64_t weights_seed = 0;

    float at(std::int32_t x, std::int32_t y, std::int32_t c) const {
        return data[(static_cast<std::size_t>(x) * height + y) * channels + c];
    }
};

/// Densifies a (W, H, Z) x C tensor; throws ShapeError unless shape and channels are as expected.
BevMap to_bev(const SparseTensor& t, const Extent3& expected_shape, std::size_t expected_channels);

/// "BEV1": magic, u32 width, u32 height, u32 channels, then width * height * channels f32.
std::vector<std::uint8_t> encode_bev(const BevMap& bev);
void write_bev(const BevMap& bev, const std::string& path);

struct StageStats {
    std::string name;
    Extent3 shape{0, 0, 0};
    std::size_t channels = 0;
    std::size_t active = 0;
    double millis = 0.0;
};

struct ForwardOptions {
    Volume volume = Volume::canonical();
    FeatureKind features = FeatureKind::Center;
};

struct ForwardResult {
    BevMap bev;
    std::vector<StageStats> stages;
    SparseTensor fused;
};

/// Full multi-resolution pass. Levels without collective input fall back to the voxelized ego cloud.
/// Throws SpecMismatch when a collective grid's spec disagrees with its level.
ForwardResult forward(const PointCloud& ego_points, std::span<const CollectiveInput> collective,
                      const BackboneWeights& w, const ForwardOptions& options = {});

/// Symbolic shapes of the pipeline, no feature allocation.
struct ShapePlan {
    /// Indexed by Stream, then block.
    std::array<std::array<Extent3, 4>, 4> blocks{};
    std::array<Extent3, 4> inputs{};
    Extent3 fused{0, 0, 0};
    std::int32_t bev_width = 0;
    std::int32_t bev_height = 0;
    std::int32_t bev_channels = 0;
};
ShapePlan plan_shapes(const Volume& volume);

}  // namespace voxfuse
