// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voxfuse/errors.hpp"

namespace voxfuse {

std::string_view to_string(Level level) {
    switch (level) {
        case Level::High: return "high";
        case Level::Medium: return "medium";
        case Level::Low: return "low";
    }
    return "unknown";
}

Level parse_level(std::string_view name) {
    if (name == "high") return Level::High;
    if (name == "medium") return Level::Medium;
    if (name == "low") return Level::Low;
    throw InvalidArgument("unknown level '" + std::string(name) + "'");
}

Vec3 canonical_voxel_size(Level level) {
    switch (level) {
        case Level::High: return {0.05, 0.05, 0.10};
        case Level::Medium: return {0.10, 0.10, 0.20};
        case Level::Low: return {0.20, 0.20, 0.40};
    }
    throw InvalidArgument("unknown level");
}

void GridSpec::validate() const {
    for (int d = 0; d < 3; ++d) {
        if (!std::isfinite(origin[d])) throw InvalidArgument("grid origin must be finite");
        if (!(voxel_size[d] > 0.0) || !std::isfinite(voxel_size[d]))
            throw InvalidArgument("voxel size must be positive and finite");
        if (dims[d] < 1 || dims[d] >= kMaxGridDim) throw InvalidArgument("grid dims out of range");
    }
}

Extent3 derive_dims(const Vec3& extent, const Vec3& voxel_size) {
    Extent3 dims{};
    for (int d = 0; d < 3; ++d) {
        if (!(extent[d] > 0.0) || !(voxel_size[d] > 0.0))
            throw InvalidArgument("extent and voxel size must be positive");
        const double ratio = extent[d] / voxel_size[d];
        const double rounded = std::round(ratio);
        if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
            throw DimensionMismatch("extent " + std::to_string(extent[d]) + " is not a multiple of voxel size " +
                                    std::to_string(voxel_size[d]));
        if (rounded >= kMaxGridDim) throw DimensionMismatch("grid dimension too large");
        dims[d] = static_cast<std::int32_t>(rounded);
    }
    return dims;
}

GridSpec Volume::spec(Level level) const {
    const Vec3 vs = voxel_sizes[static_cast<std::size_t>(level)];
    return GridSpec{origin, vs, derive_dims(extent, vs), level};
}

PointCloud::PointCloud(std::vector<Point> points, Pose frame_pose)
    : points_(std::move(points)), frame_pose_(frame_pose) {
    for (const Point& p : points_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.intensity))
            throw InvalidArgument("point cloud contains non-finite values");
}

SparseVoxelGrid::SparseVoxelGrid(GridSpec spec, std::vector<Coord> coords, std::optional<FeatureMatrix> features)
    : spec_(spec), coords_(std::move(coords)), features_(std::move(features)) {
    spec_.validate();
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (!spec_.contains(coords_[i])) throw InvalidArgument("voxel coordinate outside grid");
        if (i > 0 && !(coords_[i - 1] < coords_[i]))
            throw InvalidArgument("voxel coordinates must be unique and sorted");
    }
    if (features_ && features_->rows != coords_.size())
        throw InvalidArgument("feature row count does not match coordinate count");
}

SparseVoxelGrid SparseVoxelGrid::from_unsorted(GridSpec spec, std::vector<Coord> coords) {
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    return SparseVoxelGrid(spec, std::move(coords));
}

SparseVoxelGrid SparseVoxelGrid::with_features(FeatureMatrix features) const {
    return SparseVoxelGrid(spec_, coords_, std::move(features));
}

std::optional<Coord> voxel_of(const GridSpec& spec, const Vec3& p) {
    Coord c{};
    for (int d = 0; d < 3; ++d) {
        const double f = std::floor((p[d] - spec.origin[d]) / spec.voxel_size[d]);
        if (!(f >= 0.0) || f >= static_cast<double>(spec.dims[d])) return std::nullopt;
        c[d] = static_cast<std::int32_t>(f);
    }
    return c;
}

Vec3 voxel_center(const GridSpec& spec, const Coord& c) {
    return {spec.origin[0] + (c[0] + 0.5) * spec.voxel_size[0], spec.origin[1] + (c[1] + 0.5) * spec.voxel_size[1],
            spec.origin[2] + (c[2] + 0.5) * spec.voxel_size[2]};
}

namespace {

std::vector<Coord> unpack_sorted_unique(std::vector<std::uint64_t>& keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<Coord> coords(keys.size());
    std::transform(keys.begin(), keys.end(), coords.begin(), unpack_coord);
    return coords;
}

}  // namespace

SparseVoxelGrid voxelize(const PointCloud& pc, const GridSpec& spec, VoxelizeStats* stats) {
    spec.validate();
    std::vector<std::uint64_t> keys;
    keys.reserve(pc.size());
    for (const Point& p : pc.points())
        if (auto c = voxel_of(spec, {p.x, p.y, p.z})) keys.push_back(pack_coord(*c));
    const std::size_t kept = keys.size();
    SparseVoxelGrid grid(spec, unpack_sorted_unique(keys));
    if (stats) *stats = {pc.size(), pc.size() - kept, grid.size()};
    return grid;
}

SparseVoxelGrid center_features(const SparseVoxelGrid& grid) {
    FeatureMatrix f(grid.size(), 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3 c = voxel_center(grid.spec(), grid.coords()[i]);
        for (int d = 0; d < 3; ++d) f.at(i, d) = static_cast<float>(c[d]);
    }
    return grid.with_features(std::move(f));
}

SparseVoxelGrid mean_features(const PointCloud& pc, const GridSpec& spec) {
    spec.validate();
    // (key, point index) sorted by key then index, so every voxel sums its points in input order.
    std::vector<std::pair<std::uint64_t, std::size_t>> entries;
    entries.reserve(pc.size());
    const auto& pts = pc.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (auto c = voxel_of(spec, {pts[i].x, pts[i].y, pts[i].z})) entries.emplace_back(pack_coord(*c), i);
    std::sort(entries.begin(), entries.end());

    std::vector<Coord> coords;
    std::vector<float> feats;
    for (std::size_t begin = 0; begin < entries.size();) {
        std::size_t end = begin;
        std::array<double, 4> sum{};
        while (end < entries.size() && entries[end].first == entries[begin].first) {
            const Point& p = pts[entries[end].second];
            sum[0] += p.x;
            sum[1] += p.y;
            sum[2] += p.z;
            sum[3] += p.intensity;
            ++end;
        }
        const double n = static_cast<double>(end - begin);
        coords.push_back(unpack_coord(entries[begin].first));
        for (double s : sum) feats.push_back(static_cast<float>(s / n));
        begin = end;
    }
    FeatureMatrix f;
    f.rows = coords.size();
    f.cols = 4;
    f.data = std::move(feats);
    return SparseVoxelGrid(spec, std::move(coords), std::move(f));
}

PointCloud transform_points(const PointCloud& pc, const Pose& relative) {
    std::vector<Point> out;
    out.reserve(pc.size());
    for (const Point& p : pc.points()) {
        const Vec3 q = relative.apply({p.x, p.y, p.z});
        out.push_back({q[0], q[1], q[2], p.intensity});
    }
    return PointCloud(std::move(out), compose(pc.frame_pose(), inverse(relative)));
}

SparseVoxelGrid regrid(const SparseVoxelGrid& grid, const Pose& relative, const GridSpec& target) {
    target.validate();
    const auto& src = grid.features();
    const std::size_t cols = src ? src->cols : 0;

    std::vector<std::pair<std::uint64_t, std::size_t>> entries;
    entries.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (auto c = voxel_of(target, relative.apply(voxel_center(grid.spec(), grid.coords()[i]))))
            entries.emplace_back(pack_coord(*c), i);
    std::sort(entries.begin(), entries.end());

    std::vector<Coord> coords;
    FeatureMatrix out;
    out.cols = cols;
    std::vector<float> row(cols);
    for (std::size_t begin = 0; begin < entries.size();) {
        std::size_t end = begin;
        bool first = true;
        while (end < entries.size() && entries[end].first == entries[begin].first) {
            if (src) {
                auto in = src->row(entries[end].second);
                std::vector<float> moved(in.begin(), in.end());
                if (cols >= 3) {
                    const Vec3 q = relative.apply({in[0], in[1], in[2]});
                    for (int d = 0; d < 3; ++d) moved[d] = static_cast<float>(q[d]);
                }
                for (std::size_t c = 0; c < cols; ++c) row[c] = first ? moved[c] : max_commutative(row[c], moved[c]);
            }
            first = false;
            ++end;
        }
        coords.push_back(unpack_coord(entries[begin].first));
        out.data.insert(out.data.end(), row.begin(), row.end());
        begin = end;
    }
    if (!src) return SparseVoxelGrid(target, std::move(coords));
    out.rows = coords.size();
    return SparseVoxelGrid(target, std::move(coords), std::move(out));
}

SparseVoxelGrid merge_grids(std::span<const SparseVoxelGrid> grids) {
    if (grids.empty()) throw InvalidArgument("merge_grids needs at least one grid");
    const GridSpec& spec = grids.front().spec();
    const bool has_features = grids.front().features().has_value();
    const std::size_t cols = has_features ? grids.front().features()->cols : 0;
    for (const auto& g : grids) {
        if (!(g.spec() == spec)) throw SpecMismatch("merge_grids: grid specs differ");
        if (g.features().has_value() != has_features || (has_features && g.features()->cols != cols))
            throw SpecMismatch("merge_grids: feature layouts differ");
    }

    // (key, grid, row); max is order independent so the secondary order only fixes iteration.
    std::vector<std::tuple<std::uint64_t, std::size_t, std::size_t>> entries;
    for (std::size_t g = 0; g < grids.size(); ++g)
        for (std::size_t i = 0; i < grids[g].size(); ++i)
            entries.emplace_back(pack_coord(grids[g].coords()[i]), g, i);
    std::sort(entries.begin(), entries.end());

    std::vector<Coord> coords;
    FeatureMatrix out;
    out.cols = cols;
    for (std::size_t begin = 0; begin < entries.size();) {
        std::size_t end = begin;
        const std::size_t base = out.data.size();
        while (end < entries.size() && std::get<0>(entries[end]) == std::get<0>(entries[begin])) {
            if (has_features) {
                auto in = grids[std::get<1>(entries[end])].features()->row(std::get<2>(entries[end]));
                if (end == begin)
                    out.data.insert(out.data.end(), in.begin(), in.end());
                else
                    for (std::size_t c = 0; c < cols; ++c) out.data[base + c] = max_commutative(out.data[base + c], in[c]);
            }
            ++end;
        }
        coords.push_back(unpack_coord(std::get<0>(entries[begin])));
        begin = end;
    }
    if (!has_features) return SparseVoxelGrid(spec, std::move(coords));
    out.rows = coords.size();
    return SparseVoxelGrid(spec, std::move(coords), std::move(out));
}

}  // namespace voxfuse
