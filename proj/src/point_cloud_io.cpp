// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/point_cloud_io.hpp"

#include "voxfuse/detail/byte_io.hpp"

namespace voxfuse {

std::vector<std::uint8_t> encode_point_cloud(const PointCloud& pc) {
    detail::ByteWriter w;
    w.reserve(kPcfHeaderBytes + kPcfBytesPerPoint * pc.size());
    w.bytes("PCF1");
    w.u32(static_cast<std::uint32_t>(pc.size()));
    for (const Point& p : pc.points()) {
        w.f32(static_cast<float>(p.x));
        w.f32(static_cast<float>(p.y));
        w.f32(static_cast<float>(p.z));
        w.f32(static_cast<float>(p.intensity));
    }
    return w.take();
}

PointCloud decode_point_cloud(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    if (r.bytes(4) != "PCF1") throw UnsupportedFormat("not a PCF1 point cloud");
    const std::uint32_t count = r.u32();
    r.need(static_cast<std::size_t>(count) * kPcfBytesPerPoint);
    if (r.remaining() != static_cast<std::size_t>(count) * kPcfBytesPerPoint)
        throw CorruptPayload("trailing bytes after point cloud payload");
    std::vector<Point> pts(count);
    for (Point& p : pts) {
        p.x = r.f32();
        p.y = r.f32();
        p.z = r.f32();
        p.intensity = r.f32();
    }
    try {
        return PointCloud(std::move(pts));
    } catch (const InvalidArgument& e) {
        throw CorruptPayload(e.what());
    }
}

void write_point_cloud(const std::string& path, const PointCloud& pc) {
    detail::write_file(path, encode_point_cloud(pc));
}

PointCloud read_point_cloud(const std::string& path) { return decode_point_cloud(detail::read_file(path)); }

}  // namespace voxfuse
