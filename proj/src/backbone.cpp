// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/backbone.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "voxfuse/detail/byte_io.hpp"
#include "voxfuse/errors.hpp"
#include "voxfuse/rng.hpp"
#include "voxfuse/scatter.hpp"

namespace voxfuse {

std::string_view to_string(Stream s) {
    switch (s) {
        case Stream::Local: return "local";
        case Stream::High: return "high";
        case Stream::Medium: return "medium";
        case Stream::Low: return "low";
    }
    return "unknown";
}

Level stream_level(Stream s) {
    switch (s) {
        case Stream::Local:
        case Stream::High: return Level::High;
        case Stream::Medium: return Level::Medium;
        case Stream::Low: return Level::Low;
    }
    throw InvalidArgument("unknown stream");
}

std::array<int, 4> stride_schedule(Stream s) {
    switch (s) {
        case Stream::Local:
        case Stream::High: return {1, 2, 2, 2};
        case Stream::Medium: return {1, 1, 2, 2};
        case Stream::Low: return {1, 1, 1, 2};
    }
    throw InvalidArgument("unknown stream");
}

ConvBlockParams make_block(int in_channels, int out_channels, int stride) {
    ConvBlockParams b;
    b.layers[0] = {ConvParams(in_channels, out_channels, ConvMode::SparseStrided, stride),
                   NormParams::identity(static_cast<std::size_t>(out_channels))};
    for (int i = 1; i < 3; ++i)
        b.layers[i] = {ConvParams(out_channels, out_channels, ConvMode::Submanifold, 1),
                       NormParams::identity(static_cast<std::size_t>(out_channels))};
    return b;
}

std::vector<const ConvLayer*> BackboneWeights::layers() const {
    std::vector<const ConvLayer*> out;
    for (const auto& stream : streams)
        for (const auto& block : stream)
            for (const auto& layer : block.layers) out.push_back(&layer);
    for (const auto* block : {&collective_final, &local_final})
        for (const auto& layer : block->layers) out.push_back(&layer);
    return out;
}

std::vector<ConvLayer*> BackboneWeights::mutable_layers() {
    std::vector<ConvLayer*> out;
    for (const ConvLayer* l : layers()) out.push_back(const_cast<ConvLayer*>(l));
    return out;
}

BackboneWeights make_architecture(int in_channels) {
    if (in_channels < 1) throw InvalidArgument("input channels must be positive");
    BackboneWeights w;
    w.in_channels = in_channels;
    for (Stream s : kAllStreams) {
        const auto strides = stride_schedule(s);
        int channels = in_channels;
        for (int b = 0; b < 4; ++b) {
            w.streams[static_cast<std::size_t>(s)][b] = make_block(channels, kBlockChannels[b], strides[b]);
            channels = kBlockChannels[b];
        }
    }
    w.collective_final = make_block(kBlockChannels[3], kFinalChannels, 1);
    w.local_final = make_block(kBlockChannels[3], kFinalChannels, 1);
    return w;
}

BackboneWeights init_weights(std::uint64_t seed, int in_channels) {
    BackboneWeights w = make_architecture(in_channels);
    w.seed = seed;
    Rng rng(seed);
    for (ConvLayer* layer : w.mutable_layers()) {
        const double bound = std::sqrt(6.0 / layer->conv.fan_in());
        float fbound = static_cast<float>(bound);
        if (static_cast<double>(fbound) > bound) fbound = std::nextafter(fbound, 0.0f);
        for (float& v : layer->conv.weights) {
            const auto x = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
            v = std::clamp(x, -fbound, fbound);
        }
    }
    return w;
}

namespace {

constexpr std::uint32_t kWeightsVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_weights(const BackboneWeights& w) {
    const auto layers = w.layers();
    detail::ByteWriter out;
    out.bytes("MRW1");
    out.u32(kWeightsVersion);
    out.u64(w.seed);
    out.u32(static_cast<std::uint32_t>(w.in_channels));
    out.u32(static_cast<std::uint32_t>(layers.size()));
    for (const ConvLayer* l : layers) {
        out.u8(static_cast<std::uint8_t>(l->conv.mode));
        out.u8(static_cast<std::uint8_t>(l->conv.stride));
        out.u16(0);
        out.u32(static_cast<std::uint32_t>(l->conv.in_channels));
        out.u32(static_cast<std::uint32_t>(l->conv.out_channels));
    }
    for (const ConvLayer* l : layers) {
        for (float v : l->conv.weights) out.f32(v);
        for (const auto* vec : {&l->norm.gamma, &l->norm.beta, &l->norm.mean, &l->norm.var})
            for (float v : *vec) out.f32(v);
        out.f32(l->norm.eps);
    }
    return out.take();
}

BackboneWeights decode_weights(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    if (in.bytes(4) != "MRW1") throw UnsupportedFormat("not an MRW1 weights file");
    if (in.u32() != kWeightsVersion) throw UnsupportedFormat("unsupported weights version");
    const std::uint64_t seed = in.u64();
    const std::uint32_t in_channels = in.u32();
    if (in_channels < 1 || in_channels > 64) throw UnsupportedFormat("implausible input channel count");
    BackboneWeights w = make_architecture(static_cast<int>(in_channels));
    w.seed = seed;
    auto layers = w.mutable_layers();
    if (in.u32() != layers.size()) throw UnsupportedFormat("weights manifest has the wrong layer count");
    for (ConvLayer* l : layers) {
        const auto mode = in.u8();
        const auto stride = in.u8();
        const auto reserved = in.u16();
        const auto cin = in.u32();
        const auto cout = in.u32();
        if (mode != static_cast<std::uint8_t>(l->conv.mode) || stride != l->conv.stride || reserved != 0 ||
            cin != static_cast<std::uint32_t>(l->conv.in_channels) ||
            cout != static_cast<std::uint32_t>(l->conv.out_channels))
            throw UnsupportedFormat("weights manifest does not match the architecture");
    }
    for (ConvLayer* l : layers) {
        for (float& v : l->conv.weights) v = in.f32();
        for (auto* vec : {&l->norm.gamma, &l->norm.beta, &l->norm.mean, &l->norm.var})
            for (float& v : *vec) v = in.f32();
        l->norm.eps = in.f32();
    }
    if (in.remaining() != 0) throw UnsupportedFormat("trailing bytes after weights");
    return w;
}

void save_weights(const BackboneWeights& w, const std::string& path) { detail::write_file(path, encode_weights(w)); }

BackboneWeights load_weights(const std::string& path) { return decode_weights(detail::read_file(path)); }

SparseTensor run_block(const SparseTensor& input, const ConvBlockParams& block) {
    const ConvLayer& lead = block.layers[0];
    SparseTensor x = norm_relu(sparse_conv(input, lead.conv), lead.norm);
    // Both submanifold layers act on the same active set and share one rulebook.
    const Rulebook rb = build_rulebook(x.coords(), x.shape(), ConvMode::Submanifold, 1);
    for (int i = 1; i < 3; ++i) x = norm_relu(sparse_conv(x, block.layers[i].conv, rb), block.layers[i].norm);
    return x;
}

StreamOutputs run_stream(const SparseTensor& input, Stream s, const BackboneWeights& w, const StreamTaps& taps,
                         BlockTimings* timings) {
    if (static_cast<int>(input.channels()) != w.in_channels)
        throw ShapeError("stream input channels do not match the weights");
    StreamOutputs out;
    const auto& blocks = w.stream(s);
    const SparseTensor* next = &input;
    SparseTensor fused;
    for (int b = 0; b < 4; ++b) {
        const auto start = std::chrono::steady_clock::now();
        out[b] = run_block(*next, blocks[b]);
        next = &out[b];
        if (taps.after_block[b]) {
            fused = scatter_max({&out[b], taps.after_block[b]});
            next = &fused;
        }
        if (timings)
            (*timings)[b] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

StreamOutputs run_stream(const SparseVoxelGrid& input, Stream s, const BackboneWeights& w, const Volume& volume,
                         const StreamTaps& taps, BlockTimings* timings) {
    if (!(input.spec() == volume.spec(stream_level(s))))
        throw ShapeError("grid spec does not match the " + std::string(to_string(s)) + " stream");
    return run_stream(SparseTensor::from_grid(input), s, w, taps, timings);
}

BevMap to_bev(const SparseTensor& t, const Extent3& expected_shape, std::size_t expected_channels) {
    if (t.shape() != expected_shape || t.channels() != expected_channels)
        throw ShapeError("tensor does not have the expected bird's-eye-view shape");
    BevMap bev;
    bev.width = expected_shape[0];
    bev.height = expected_shape[1];
    const auto c = static_cast<std::int32_t>(expected_channels);
    bev.channels = expected_shape[2] * c;
    bev.data.assign(static_cast<std::size_t>(bev.width) * bev.height * bev.channels, 0.0f);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Coord& p = t.coords()[i];
        auto row = t.features().row(i);
        float* dst = bev.data.data() + (static_cast<std::size_t>(p[0]) * bev.height + p[1]) * bev.channels + p[2] * c;
        std::copy(row.begin(), row.end(), dst);
    }
    return bev;
}

std::vector<std::uint8_t> encode_bev(const BevMap& bev) {
    detail::ByteWriter out;
    out.reserve(16 + bev.data.size() * 4);
    out.bytes("BEV1");
    out.u32(static_cast<std::uint32_t>(bev.width));
    out.u32(static_cast<std::uint32_t>(bev.height));
    out.u32(static_cast<std::uint32_t>(bev.channels));
    for (float v : bev.data) out.f32(v);
    return out.take();
}

void write_bev(const BevMap& bev, const std::string& path) { detail::write_file(path, encode_bev(bev)); }

ShapePlan plan_shapes(const Volume& volume) {
    ShapePlan plan;
    for (Stream s : kAllStreams) {
        const auto si = static_cast<std::size_t>(s);
        Extent3 shape = volume.spec(stream_level(s)).dims;
        plan.inputs[si] = shape;
        const auto strides = stride_schedule(s);
        for (int b = 0; b < 4; ++b) {
            shape = conv_output_shape(shape, ConvMode::SparseStrided, strides[b]);
            plan.blocks[si][b] = shape;
        }
    }
    const auto& hi = plan.blocks[static_cast<std::size_t>(Stream::High)];
    const auto& med = plan.blocks[static_cast<std::size_t>(Stream::Medium)];
    const auto& low = plan.blocks[static_cast<std::size_t>(Stream::Low)];
    const auto& local = plan.blocks[static_cast<std::size_t>(Stream::Local)];
    if (hi[1] != med[1] || hi[2] != med[2] || med[2] != low[2] || hi[3] != med[3] || med[3] != low[3] ||
        low[3] != local[3])
        throw ShapeError("stream shapes do not meet at the fusion points for this volume");
    plan.fused = conv_output_shape(hi[3], ConvMode::SparseStrided, 1);
    plan.bev_width = plan.fused[0];
    plan.bev_height = plan.fused[1];
    plan.bev_channels = plan.fused[2] * kFusedChannels;
    return plan;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

SparseVoxelGrid level_input(const PointCloud& ego, std::span<const CollectiveInput> collective, Level level,
                            const Volume& volume, FeatureKind kind) {
    const GridSpec spec = volume.spec(level);
    std::vector<SparseVoxelGrid> assigned;
    for (const auto& c : collective) {
        if (c.level != level) continue;
        if (!(c.grid.spec() == spec))
            throw SpecMismatch("collective grid for level " + std::string(to_string(level)) +
                               " does not use that level's spec");
        if (kind == FeatureKind::Center) {
            assigned.push_back(c.grid.without_features());
        } else {
            if (!c.grid.features() || c.grid.features()->cols != 4)
                throw ShapeError("mean-feature forward requires F = 4 collective features");
            assigned.push_back(c.grid);
        }
    }
    if (assigned.empty()) {
        return kind == FeatureKind::Center ? center_features(voxelize(ego, spec)) : mean_features(ego, spec);
    }
    SparseVoxelGrid merged = merge_grids(assigned);
    return kind == FeatureKind::Center ? center_features(merged) : merged;
}

}  // namespace

ForwardResult forward(const PointCloud& ego_points, std::span<const CollectiveInput> collective,
                      const BackboneWeights& w, const ForwardOptions& options) {
    if (w.in_channels != feature_channels(options.features))
        throw ShapeError("weights input channels do not match the selected voxel features");
    const ShapePlan plan = plan_shapes(options.volume);
    const Volume& vol = options.volume;
    ForwardResult result;

    auto record = [&](std::string name, const SparseTensor& t, Clock::time_point start) {
        result.stages.push_back({std::move(name), t.shape(), t.channels(), t.size(), elapsed_ms(start)});
    };
    BlockTimings timings{};
    auto record_stream = [&](Stream s, const StreamOutputs& out) {
        for (int b = 0; b < 4; ++b)
            result.stages.push_back({std::string(to_string(s)) + ".b" + std::to_string(b + 1), out[b].shape(),
                                     out[b].channels(), out[b].size(), timings[b]});
    };

    auto start = Clock::now();
    const GridSpec high_spec = vol.spec(Level::High);
    const SparseVoxelGrid local_in = options.features == FeatureKind::Center
                                         ? center_features(voxelize(ego_points, high_spec))
                                         : mean_features(ego_points, high_spec);
    const SparseVoxelGrid high_in = level_input(ego_points, collective, Level::High, vol, options.features);
    const SparseVoxelGrid med_in = level_input(ego_points, collective, Level::Medium, vol, options.features);
    const SparseVoxelGrid low_in = level_input(ego_points, collective, Level::Low, vol, options.features);
    result.stages.push_back({"inputs", vol.spec(Level::High).dims, local_in.features()->cols, local_in.size(),
                             elapsed_ms(start)});

    // Lower resolutions first: each stream's junctions consume the stream below it.
    const StreamOutputs low = run_stream(low_in, Stream::Low, w, vol, {}, &timings);
    record_stream(Stream::Low, low);

    StreamTaps med_taps;
    med_taps.after_block[2] = &low[2];
    const StreamOutputs med = run_stream(med_in, Stream::Medium, w, vol, med_taps, &timings);
    record_stream(Stream::Medium, med);

    StreamTaps high_taps;
    high_taps.after_block[1] = &med[1];
    high_taps.after_block[2] = &med[2];
    const StreamOutputs high = run_stream(high_in, Stream::High, w, vol, high_taps, &timings);
    record_stream(Stream::High, high);

    const StreamOutputs local = run_stream(local_in, Stream::Local, w, vol, {}, &timings);
    record_stream(Stream::Local, local);

    start = Clock::now();
    SparseTensor fused = scatter_max({&high[3], &med[3], &low[3], &local[3]});
    record("fused", fused, start);

    start = Clock::now();
    const SparseTensor collective_out = run_block(fused, w.collective_final);
    record("collective_final", collective_out, start);
    start = Clock::now();
    const SparseTensor local_out = run_block(fused, w.local_final);
    record("local_final", local_out, start);
    if (collective_out.coords() != local_out.coords())
        throw ShapeError("final blocks produced different active sets");

    start = Clock::now();
    const std::size_t c1 = collective_out.channels();
    const std::size_t c2 = local_out.channels();
    FeatureMatrix cat(collective_out.size(), c1 + c2);
    for (std::size_t i = 0; i < cat.rows; ++i) {
        auto a = collective_out.features().row(i);
        auto b = local_out.features().row(i);
        std::copy(a.begin(), a.end(), cat.row(i).begin());
        std::copy(b.begin(), b.end(), cat.row(i).begin() + static_cast<std::ptrdiff_t>(c1));
    }
    SparseTensor concatenated(collective_out.shape(), collective_out.coords(), std::move(cat));
    result.bev = to_bev(concatenated, plan.fused, kFusedChannels);
    result.bev.spec = vol.spec(Level::High);
    result.bev.weights_seed = w.seed;
    record("bev", concatenated, start);
    result.fused = std::move(fused);
    return result;
}

}  // namespace voxfuse
