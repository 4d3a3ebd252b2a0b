// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "voxfuse/config.hpp"
#include "voxfuse/errors.hpp"

namespace voxfuse {
namespace {

TEST(Config, DefaultsAreCanonical) {
    const Config c;
    EXPECT_EQ(c.volume, Volume::canonical());
    EXPECT_EQ(c.volume.spec(Level::High).dims, (Extent3{5600, 1600, 40}));
    EXPECT_EQ(c.frequency, 10.0);
    EXPECT_EQ(c.range, 70.0);
    EXPECT_FALSE(c.capacity.has_value());
    EXPECT_EQ(c.mode, codec::Mode::CoordsOnly);
    EXPECT_EQ(c.sublayout, codec::Sublayout::Compat);
    EXPECT_EQ(c.strategy.kind, comms::StrategyKind::Uniform);
    EXPECT_EQ(parse_config("# nothing\n\n").volume, c.volume);
}

TEST(Config, ParsesEveryKey) {
    const Config c = parse_config(
        "volume = reduced\n"
        "mode = mean   # trailing comment\n"
        "sublayout = packed\n"
        "features = mean\n"
        "frequency = 20\n"
        "range = 50.5\n"
        "capacity = 12\n"
        "strategy = budget\n"
        "seed = 9\n"
        "frames = 7\n"
        "points = 100\n"
        "weights = w.mrw\n"
        "threads = 2\n");
    EXPECT_EQ(c.volume, Volume::reduced());
    EXPECT_EQ(c.mode, codec::Mode::CoordsPlusMeanFeatures);
    EXPECT_EQ(c.sublayout, codec::Sublayout::Packed);
    EXPECT_EQ(c.features, FeatureKind::Mean);
    EXPECT_EQ(c.frequency, 20.0);
    EXPECT_EQ(c.range, 50.5);
    EXPECT_EQ(c.capacity, 12.0);
    EXPECT_EQ(c.strategy.kind, comms::StrategyKind::Budget);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.frames, 7u);
    EXPECT_EQ(c.points, 100u);
    EXPECT_EQ(c.weights_path, "w.mrw");
    EXPECT_EQ(c.threads, 2);

    const comms::ChannelConfig ch = c.channel();
    EXPECT_EQ(ch.frequency, 20.0);
    EXPECT_EQ(ch.comm_range, 50.5);
    EXPECT_EQ(ch.capacity_mbps, 12.0);
    EXPECT_EQ(ch.volume, Volume::reduced());
}

TEST(Config, ExplicitGeometry) {
    const Config c = parse_config("origin = -8 -4 -3\nextent = 16 8 4\nvoxel_low = 0.4 0.4 0.4\n");
    EXPECT_EQ(c.volume.origin, (Vec3{-8, -4, -3}));
    EXPECT_EQ(c.volume.spec(Level::Low).dims, (Extent3{40, 20, 10}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("colour = red\n"), InvalidArgument);
    EXPECT_THROW(parse_config("frequency\n"), InvalidArgument);
    for (const char* bad : {"frequency = 0", "frequency = -1", "frequency = ten", "range = nan", "seed = -3",
                            "frames = 1.5", "mode = zip", "sublayout = tight", "features = none", "strategy = greedy",
                            "volume = huge", "extent = 1 2", "extent = 1 2 0", "weights = ", "capacity = inf"})
        EXPECT_THROW(parse_config(bad), InvalidArgument) << bad;
}

TEST(Config, ExtentMustDivideIntoEveryLevel) {
    EXPECT_THROW(parse_config("extent = 17.5 80 4\n"), DimensionMismatch);
}

TEST(Config, LoadFromFile) {
    const auto path = (std::filesystem::temp_directory_path() / "voxfuse_config_test.conf").string();
    std::ofstream(path) << "strategy = low\nseed = 3\n";
    const Config c = load_config(path);
    EXPECT_EQ(c.strategy.kind, comms::StrategyKind::Fixed);
    EXPECT_EQ(c.strategy.fixed_level, Level::Low);
    EXPECT_EQ(c.seed, 3u);
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path), IoError);
}

}  // namespace
}  // namespace voxfuse
