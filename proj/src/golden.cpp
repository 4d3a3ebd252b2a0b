// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/golden.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>

#include "voxfuse/backbone.hpp"
#include "voxfuse/comms.hpp"
#include "voxfuse/hash.hpp"
#include "voxfuse/point_cloud_io.hpp"

namespace voxfuse::golden {

codec::VoxelGridMessage random_message(Rng& rng, codec::Mode mode, std::size_t max_voxels) {
    GridSpec spec;
    spec.level = kAllLevels[rng.below(3)];
    for (int d = 0; d < 3; ++d) {
        spec.origin[d] = rng.uniform(-200.0, 200.0);
        spec.voxel_size[d] = rng.uniform(0.01, 1.0);
        spec.dims[d] = static_cast<std::int32_t>(1 + rng.below(4000));
    }
    const std::size_t count = rng.below(max_voxels + 1);
    std::vector<Coord> coords(count);
    for (Coord& c : coords)
        for (int d = 0; d < 3; ++d) c[d] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(spec.dims[d])));

    codec::VoxelGridMessage m;
    m.sender_id = static_cast<std::uint32_t>(rng.next());
    m.timestamp_us = rng.next();
    m.sender_pose = Pose::from_yaw(rng.uniform(-std::numbers::pi, std::numbers::pi),
                                   {rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0), rng.uniform(-5.0, 5.0)});
    SparseVoxelGrid grid = SparseVoxelGrid::from_unsorted(spec, std::move(coords));
    if (mode == codec::Mode::CoordsPlusMeanFeatures) {
        FeatureMatrix f(grid.size(), 4);
        for (float& v : f.data) v = static_cast<float>(rng.uniform(-100.0, 100.0));
        grid = grid.with_features(std::move(f));
    }
    m.payload = std::move(grid);
    return codec::quantize_for_wire(std::move(m));
}

SparseTensor random_tensor(Rng& rng, const Extent3& shape, std::size_t channels, double density) {
    std::vector<Coord> coords;
    for (std::int32_t x = 0; x < shape[0]; ++x)
        for (std::int32_t y = 0; y < shape[1]; ++y)
            for (std::int32_t z = 0; z < shape[2]; ++z)
                if (rng.uniform() < density) coords.push_back({x, y, z});
    FeatureMatrix f(coords.size(), channels);
    for (float& v : f.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return SparseTensor(shape, std::move(coords), std::move(f));
}

PointCloud synthetic_cloud(std::uint64_t seed) {
    // Through the file format, so the result matches a cloud read back from disk.
    return decode_point_cloud(encode_point_cloud(comms::gen_scene(seed, 2).ego().cloud));
}

std::vector<Artifact> build_artifacts() {
    std::vector<Artifact> out;

    Rng rng(20260101);
    int n = 0;
    for (codec::Mode mode : {codec::Mode::CoordsOnly, codec::Mode::CoordsPlusMeanFeatures})
        for (codec::Sublayout sub : {codec::Sublayout::Compat, codec::Sublayout::Packed})
            for (int i = 0; i < 2; ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "codec_%02d.svg", n++);
                out.push_back({name, codec::encode(random_message(rng, mode), mode, sub)});
            }

    codec::VoxelGridMessage m;
    m.payload = voxelize(synthetic_cloud(7), canonical_spec(Level::Low));
    out.push_back({"voxelize_seed7_low.svg", codec::encode(codec::quantize_for_wire(std::move(m)))});

    const auto scenario = comms::gen_scenario(1, 100, 8000);
    const auto report = comms::simulate(scenario, comms::ChannelConfig{}, comms::Strategy::uniform(), 1);
    const std::string text = comms::format_report(report);
    out.push_back({"simulate_seed1_uniform.txt", {text.begin(), text.end()}});

    const std::string digest = sha256_hex(encode_weights(init_weights(42))) + "\n";
    out.push_back({"weights_seed42.sha256", {digest.begin(), digest.end()}});
    return out;
}

}  // namespace voxfuse::golden
