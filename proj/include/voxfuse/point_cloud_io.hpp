// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxfuse/grid.hpp"

namespace voxfuse {

// "PCF1" point cloud files: magic, u32 count, count x (x, y, z, intensity) f32, little-endian.
inline constexpr std::size_t kPcfHeaderBytes = 8;
inline constexpr std::size_t kPcfBytesPerPoint = 16;

std::vector<std::uint8_t> encode_point_cloud(const PointCloud& pc);
/// The returned cloud carries an identity frame pose; the format stores none.
PointCloud decode_point_cloud(std::span<const std::uint8_t> bytes);

void write_point_cloud(const std::string& path, const PointCloud& pc);
PointCloud read_point_cloud(const std::string& path);

}  // namespace voxfuse
