// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/codec.hpp"

#include <cmath>
#include <limits>

#include "voxfuse/detail/byte_io.hpp"
#include "voxfuse/errors.hpp"

namespace voxfuse::codec {
namespace {

constexpr std::uint8_t kFeatureBit = 0x1;
constexpr std::uint8_t kPackedBit = 0x2;

// Kept out of line: gcc 11 with AVX2 SLP-vectorizes the caller's loop and drops the narrowing.
[[gnu::noinline]] double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void check_finite(float v, const char* what) {
    if (!std::isfinite(v)) throw CorruptPayload(std::string("non-finite ") + what);
}

}  // namespace

VoxelGridMessage quantize_for_wire(VoxelGridMessage m) {
    for (double& v : m.sender_pose.rotation) v = to_f32(v);
    for (double& v : m.sender_pose.translation) v = to_f32(v);
    GridSpec spec = m.payload.spec();
    for (int d = 0; d < 3; ++d) {
        spec.origin[d] = to_f32(spec.origin[d]);
        spec.voxel_size[d] = to_f32(spec.voxel_size[d]);
    }
    m.payload = SparseVoxelGrid(spec, m.payload.coords(), m.payload.features());
    return m;
}

std::size_t payload_size(std::size_t count, Mode mode, Sublayout sublayout) {
    std::size_t per_voxel = sublayout == Sublayout::Packed ? 6 : 12;
    if (mode == Mode::CoordsPlusMeanFeatures) per_voxel += kFeatureBytesPerVoxel;
    return per_voxel * count;
}

std::vector<std::uint8_t> encode(const VoxelGridMessage& m, Mode mode, Sublayout sublayout) {
    const GridSpec& spec = m.spec();
    const auto& coords = m.payload.coords();
    const bool with_features = mode == Mode::CoordsPlusMeanFeatures;
    if (with_features && (!m.payload.features() || m.payload.features()->cols != 4))
        throw InvalidArgument("mean-feature encoding requires F = 4 features");
    if (sublayout == Sublayout::Packed)
        for (std::int32_t d : spec.dims)
            if (d > std::numeric_limits<std::uint16_t>::max())
                throw EncodingOverflow("grid dims exceed the packed 16-bit coordinate range");
    if (coords.size() > std::numeric_limits<std::uint32_t>::max()) throw EncodingOverflow("too many voxels");

    detail::ByteWriter w;
    w.reserve(encoded_size(coords.size(), mode, sublayout));
    w.bytes("SVG1");
    w.u8(kVersion);
    w.u8(static_cast<std::uint8_t>((with_features ? kFeatureBit : 0) |
                                   (sublayout == Sublayout::Packed ? kPackedBit : 0)));
    w.u32(m.sender_id);
    w.u64(m.timestamp_us);
    for (double v : m.sender_pose.rotation) w.f32(static_cast<float>(v));
    for (double v : m.sender_pose.translation) w.f32(static_cast<float>(v));
    w.u8(static_cast<std::uint8_t>(spec.level));
    for (double v : spec.origin) w.f32(static_cast<float>(v));
    for (double v : spec.voxel_size) w.f32(static_cast<float>(v));
    for (std::int32_t v : spec.dims) w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(coords.size()));
    for (const Coord& c : coords) {
        for (std::int32_t v : c) {
            if (sublayout == Sublayout::Packed)
                w.u16(static_cast<std::uint16_t>(v));
            else
                w.u32(static_cast<std::uint32_t>(v));
        }
    }
    if (with_features)
        for (float v : m.payload.features()->data) w.f32(v);
    return w.take();
}

namespace {

struct RawHeader {
    MessageHeader header;
    Pose pose;
    GridSpec spec;
};

RawHeader read_header(detail::ByteReader& r) {
    if (r.bytes(4) != "SVG1") throw UnsupportedFormat("bad magic: not an SVG1 message");
    if (r.u8() != kVersion) throw UnsupportedFormat("unsupported SVG1 version");
    const std::uint8_t mode = r.u8();
    if (mode & ~(kFeatureBit | kPackedBit)) throw UnsupportedFormat("unknown mode flags");

    RawHeader h;
    h.header.mode = (mode & kFeatureBit) ? Mode::CoordsPlusMeanFeatures : Mode::CoordsOnly;
    h.header.sublayout = (mode & kPackedBit) ? Sublayout::Packed : Sublayout::Compat;
    h.header.sender_id = r.u32();
    h.header.timestamp_us = r.u64();
    for (double& v : h.pose.rotation) v = r.f32();
    for (double& v : h.pose.translation) v = r.f32();
    const std::uint8_t level = r.u8();
    if (level > static_cast<std::uint8_t>(Level::Low)) throw CorruptPayload("unknown resolution level");
    h.header.level = static_cast<Level>(level);
    h.spec.level = h.header.level;
    for (double& v : h.spec.origin) v = r.f32();
    for (double& v : h.spec.voxel_size) v = r.f32();
    for (std::int32_t& v : h.spec.dims) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d >= static_cast<std::uint32_t>(kMaxGridDim)) throw CorruptPayload("grid dims out of range");
        v = static_cast<std::int32_t>(d);
    }
    h.header.count = r.u32();
    return h;
}

}  // namespace

MessageHeader peek_header(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    return read_header(r).header;
}

VoxelGridMessage decode(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    RawHeader h = read_header(r);

    for (double v : h.pose.rotation) check_finite(static_cast<float>(v), "pose");
    for (double v : h.pose.translation) check_finite(static_cast<float>(v), "pose");
    if (h.pose.orthonormality_error() > 1e-5) throw CorruptPayload("sender rotation is not orthonormal");
    try {
        h.spec.validate();
    } catch (const InvalidArgument& e) {
        throw CorruptPayload(e.what());
    }

    const std::size_t count = h.header.count;
    const std::size_t expected = payload_size(count, h.header.mode, h.header.sublayout);
    r.need(expected);
    if (r.remaining() != expected) throw CorruptPayload("trailing bytes after payload");

    std::vector<Coord> coords(count);
    const bool packed = h.header.sublayout == Sublayout::Packed;
    for (std::size_t i = 0; i < count; ++i) {
        Coord& c = coords[i];
        for (std::int32_t& v : c) {
            const std::uint32_t raw = packed ? r.u16() : r.u32();
            if (raw >= static_cast<std::uint32_t>(kMaxGridDim)) throw CorruptPayload("coordinate out of bounds");
            v = static_cast<std::int32_t>(raw);
        }
        if (!h.spec.contains(c)) throw CorruptPayload("coordinate out of bounds");
        if (i > 0 && !(coords[i - 1] < c)) throw CorruptPayload("coordinates not strictly sorted");
    }

    std::optional<FeatureMatrix> features;
    if (h.header.mode == Mode::CoordsPlusMeanFeatures) {
        FeatureMatrix f(count, 4);
        for (float& v : f.data) {
            v = r.f32();
            check_finite(v, "feature");
        }
        features = std::move(f);
    }

    VoxelGridMessage m;
    m.sender_id = h.header.sender_id;
    m.timestamp_us = h.header.timestamp_us;
    m.sender_pose = h.pose;
    m.payload = SparseVoxelGrid(h.spec, std::move(coords), std::move(features));
    return m;
}

double bandwidth_mbps(double frame_bytes, double frequency) { return frame_bytes * 8.0 * frequency / 1e6; }

SizeReport bandwidth(double frame_bytes, double frequency) {
    if (!(frequency > 0.0)) throw InvalidArgument("frequency must be positive");
    if (!(frame_bytes >= 0.0)) throw InvalidArgument("frame size must be non-negative");
    return {frame_bytes, frequency, bandwidth_mbps(frame_bytes, frequency)};
}

std::string truncate_one_decimal(double value) {
    if (!(value >= 0.0)) throw InvalidArgument("cannot display a negative bandwidth");
    // The relative nudge keeps exact decimals such as 14.4 from landing on 143.999...
    const auto tenths = static_cast<long long>(std::floor(value * 10.0 * (1.0 + 1e-12)));
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string SizeReport::display() const { return truncate_one_decimal(bandwidth_mbps); }

}  // namespace voxfuse::codec
