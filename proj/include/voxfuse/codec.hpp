// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxfuse/grid.hpp"

namespace voxfuse::codec {

// "SVG1" sparse voxel grid message, little-endian:
//
//   magic "SVG1"     4
//   version u8       1   (= 1)
//   mode u8          1   bit0: mean features follow, bit1: packed coordinates
//   sender_id u32    4
//   timestamp u64    8   microseconds since scenario start
//   pose 12 x f32   48   rotation row-major, then translation
//   level u8         1
//   origin 3 x f32  12
//   voxel 3 x f32   12
//   dims 3 x u32    12
//   count u32        4
//   count x (3 x u32 | 3 x u16) coordinates
//   count x 4 x f32 mean features (x, y, z, intensity), when bit0 is set

enum class Mode : std::uint8_t { CoordsOnly = 0, CoordsPlusMeanFeatures = 1 };
/// Compat stores 3 x u32 per voxel (12 B), Packed 3 x u16 (6 B).
enum class Sublayout : std::uint8_t { Compat = 0, Packed = 1 };

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 107;
inline constexpr std::size_t kFeatureBytesPerVoxel = 16;
/// Bytes per raw LiDAR point: four f32 values.
inline constexpr std::size_t kRawBytesPerPoint = 16;

struct VoxelGridMessage {
    std::uint32_t sender_id = 0;
    std::uint64_t timestamp_us = 0;
    Pose sender_pose;
    SparseVoxelGrid payload;

    const GridSpec& spec() const { return payload.spec(); }

    friend bool operator==(const VoxelGridMessage&, const VoxelGridMessage&) = default;
};

/// Rounds pose, origin and voxel size to f32, the precision they travel at.
/// decode(encode(m)) == m holds exactly for quantized messages.
VoxelGridMessage quantize_for_wire(VoxelGridMessage m);

std::vector<std::uint8_t> encode(const VoxelGridMessage& m, Mode mode = Mode::CoordsOnly,
                                 Sublayout sublayout = Sublayout::Compat);
VoxelGridMessage decode(std::span<const std::uint8_t> bytes);

struct MessageHeader {
    Mode mode = Mode::CoordsOnly;
    Sublayout sublayout = Sublayout::Compat;
    std::uint32_t sender_id = 0;
    std::uint64_t timestamp_us = 0;
    Level level = Level::High;
    std::uint32_t count = 0;
};
/// Parses the fixed header only.
MessageHeader peek_header(std::span<const std::uint8_t> bytes);

std::size_t payload_size(std::size_t count, Mode mode, Sublayout sublayout);
inline std::size_t encoded_size(std::size_t count, Mode mode, Sublayout sublayout) {
    return kHeaderBytes + payload_size(count, mode, sublayout);
}
inline std::size_t raw_point_cloud_size(std::size_t points) { return kRawBytesPerPoint * points; }

struct SizeReport {
    double frame_bytes = 0.0;
    double frequency = 0.0;
    /// Decimal megabits per second, untruncated.
    double bandwidth_mbps = 0.0;

    /// One decimal, truncated toward zero.
    std::string display() const;
};

/// Throws InvalidArgument for frequency <= 0.
SizeReport bandwidth(double frame_bytes, double frequency);
double bandwidth_mbps(double frame_bytes, double frequency);
/// Truncates a non-negative value to one decimal: 73.192 -> "73.1", 8.88 -> "8.8".
std::string truncate_one_decimal(double value);

}  // namespace voxfuse::codec
