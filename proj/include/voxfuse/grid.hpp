// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "voxfuse/feature_matrix.hpp"
#include "voxfuse/geometry.hpp"

namespace voxfuse {

using Coord = std::array<std::int32_t, 3>;
using Extent3 = std::array<std::int32_t, 3>;

/// Per-axis coordinates must stay below this bound so a voxel packs into one 64-bit key.
inline constexpr std::int32_t kMaxGridDim = 1 << 21;

inline std::uint64_t pack_coord(const Coord& c) {
    return (static_cast<std::uint64_t>(c[0]) << 42) | (static_cast<std::uint64_t>(c[1]) << 21) |
           static_cast<std::uint64_t>(c[2]);
}
inline Coord unpack_coord(std::uint64_t key) {
    constexpr std::uint64_t mask = (1u << 21) - 1;
    return {static_cast<std::int32_t>(key >> 42), static_cast<std::int32_t>((key >> 21) & mask),
            static_cast<std::int32_t>(key & mask)};
}

enum class Level : std::uint8_t { High = 0, Medium = 1, Low = 2 };
inline constexpr std::array<Level, 3> kAllLevels{Level::High, Level::Medium, Level::Low};

std::string_view to_string(Level level);
/// Accepts "high", "medium", "low".
Level parse_level(std::string_view name);
/// 5x5x10 cm, 10x10x20 cm, 20x20x40 cm.
Vec3 canonical_voxel_size(Level level);

struct GridSpec {
    Vec3 origin{0.0, 0.0, 0.0};
    Vec3 voxel_size{1.0, 1.0, 1.0};
    Extent3 dims{1, 1, 1};
    Level level = Level::High;

    bool contains(const Coord& c) const {
        return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < dims[0] && c[1] < dims[1] && c[2] < dims[2];
    }
    /// Throws InvalidArgument on non-positive sizes or dims outside [1, kMaxGridDim].
    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// extent / voxel_size per axis; throws DimensionMismatch unless divisible within 1e-9 relative.
Extent3 derive_dims(const Vec3& extent, const Vec3& voxel_size);

/// Axis-aligned ego-frame volume shared by every resolution level.
struct Volume {
    Vec3 origin{-140.0, -40.0, -3.0};
    Vec3 extent{280.0, 80.0, 4.0};
    /// Indexed by Level.
    std::array<Vec3, 3> voxel_sizes{canonical_voxel_size(Level::High), canonical_voxel_size(Level::Medium),
                                    canonical_voxel_size(Level::Low)};

    /// 280 m x 80 m x 4 m starting at (-140, -40, -3).
    static Volume canonical() { return {}; }
    /// 19.2 m x 6.4 m x 4 m; every level and stride stage stays integral.
    static Volume reduced() {
        Volume v;
        v.origin = {-9.6, -3.2, -3.0};
        v.extent = {19.2, 6.4, 4.0};
        return v;
    }

    GridSpec spec(Level level) const;

    friend bool operator==(const Volume&, const Volume&) = default;
};

inline GridSpec canonical_spec(Level level) { return Volume::canonical().spec(level); }

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double intensity = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Points in the sensor frame; `frame_pose` places the sensor in world coordinates.
class PointCloud {
public:
    PointCloud() = default;
    /// Throws InvalidArgument on any non-finite coordinate or intensity.
    explicit PointCloud(std::vector<Point> points, Pose frame_pose = Pose::identity());

    const std::vector<Point>& points() const { return points_; }
    const Pose& frame_pose() const { return frame_pose_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
    std::vector<Point> points_;
    Pose frame_pose_;
};

/// Coordinate-format occupancy grid. Coordinates are unique and sorted x-major.
class SparseVoxelGrid {
public:
    SparseVoxelGrid() = default;
    explicit SparseVoxelGrid(GridSpec spec) : spec_(spec) {}
    /// Validates ordering, uniqueness, bounds and feature row count.
    SparseVoxelGrid(GridSpec spec, std::vector<Coord> coords, std::optional<FeatureMatrix> features = std::nullopt);

    /// Sorts and deduplicates arbitrary in-bounds coordinates.
    static SparseVoxelGrid from_unsorted(GridSpec spec, std::vector<Coord> coords);

    const GridSpec& spec() const { return spec_; }
    const std::vector<Coord>& coords() const { return coords_; }
    const std::optional<FeatureMatrix>& features() const { return features_; }
    std::size_t size() const { return coords_.size(); }
    bool empty() const { return coords_.empty(); }

    SparseVoxelGrid with_features(FeatureMatrix features) const;
    SparseVoxelGrid without_features() const { return SparseVoxelGrid(spec_, coords_); }

    friend bool operator==(const SparseVoxelGrid&, const SparseVoxelGrid&) = default;

private:
    GridSpec spec_;
    std::vector<Coord> coords_;
    std::optional<FeatureMatrix> features_;
};

/// Voxel index of a point, or nullopt when it falls outside the half-open volume.
std::optional<Coord> voxel_of(const GridSpec& spec, const Vec3& p);
Vec3 voxel_center(const GridSpec& spec, const Coord& c);

struct VoxelizeStats {
    std::size_t points = 0;
    std::size_t dropped = 0;
    std::size_t voxels = 0;
};

SparseVoxelGrid voxelize(const PointCloud& pc, const GridSpec& spec, VoxelizeStats* stats = nullptr);
/// F = 3 features holding each voxel's center.
SparseVoxelGrid center_features(const SparseVoxelGrid& grid);
/// F = 4 features holding the mean (x, y, z, intensity) of the points inside each voxel.
SparseVoxelGrid mean_features(const PointCloud& pc, const GridSpec& spec);
PointCloud transform_points(const PointCloud& pc, const Pose& relative);

/// Moves voxel centers through `relative` and re-voxelizes them into `target`.
/// When features are present their first three columns are treated as positions and transformed too;
/// voxels that collide are combined by element-wise maximum.
SparseVoxelGrid regrid(const SparseVoxelGrid& grid, const Pose& relative, const GridSpec& target);

/// Coordinate union; features combined by element-wise maximum. Throws SpecMismatch.
SparseVoxelGrid merge_grids(std::span<const SparseVoxelGrid> grids);

/// max() that is order-independent on signed zeros.
inline float max_commutative(float a, float b) {
    if (a < b) return b;
    if (b < a) return a;
    return std::signbit(a) ? b : a;
}

}  // namespace voxfuse
