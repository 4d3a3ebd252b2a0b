// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "voxfuse/backbone.hpp"
#include "voxfuse/codec.hpp"
#include "voxfuse/comms.hpp"

namespace voxfuse {

// Plain-text configuration, one `key = value` per line, '#' starts a comment.
//
//   volume       canonical | reduced      preset for origin and extent
//   origin       x y z                    meters
//   extent       x y z                    meters
//   voxel_high   x y z                    meters (likewise voxel_medium, voxel_low)
//   mode         coords | mean
//   sublayout    compat | packed
//   features     center | mean
//   frequency    Hz
//   range        meters
//   capacity     Mbit/s
//   strategy     uniform | budget | high | medium | low
//   seed         unsigned integer
//   frames       unsigned integer
//   points       rays per synthetic vehicle
//   weights      path to an MRW1 file
//   threads      0 = all cores
//
// Unknown keys and malformed values raise InvalidArgument.
struct Config {
    Volume volume = Volume::canonical();
    codec::Mode mode = codec::Mode::CoordsOnly;
    codec::Sublayout sublayout = codec::Sublayout::Compat;
    FeatureKind features = FeatureKind::Center;
    double frequency = 10.0;
    double range = 70.0;
    std::optional<double> capacity;
    comms::Strategy strategy = comms::Strategy::uniform();
    std::uint64_t seed = 42;
    std::size_t frames = 100;
    std::size_t points = comms::kDefaultPointsPerVehicle;
    std::optional<std::string> weights_path;
    int threads = 0;

    comms::ChannelConfig channel() const;
};

/// Applies one key/value pair to `cfg`.
void apply_setting(Config& cfg, std::string_view key, std::string_view value);
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

codec::Mode parse_mode(std::string_view s);
codec::Sublayout parse_sublayout(std::string_view s);
FeatureKind parse_features(std::string_view s);

}  // namespace voxfuse
