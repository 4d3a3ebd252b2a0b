// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "voxfuse/errors.hpp"

namespace voxfuse {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw InvalidArgument("invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
    return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
    return out;
}

double positive(std::string_view key, std::string_view v) {
    const double d = to_double(key, v);
    if (!(d > 0.0)) bad_value(key, v);
    return d;
}

Vec3 to_vec3(std::string_view key, std::string_view v, bool require_positive) {
    const auto parts = split_ws(v);
    if (parts.size() != 3) bad_value(key, v);
    Vec3 out{};
    for (int d = 0; d < 3; ++d) {
        out[d] = to_double(key, parts[d]);
        if (require_positive && !(out[d] > 0.0)) bad_value(key, v);
    }
    return out;
}

}  // namespace

codec::Mode parse_mode(std::string_view s) {
    if (s == "coords") return codec::Mode::CoordsOnly;
    if (s == "mean") return codec::Mode::CoordsPlusMeanFeatures;
    bad_value("mode", s);
}

codec::Sublayout parse_sublayout(std::string_view s) {
    if (s == "compat") return codec::Sublayout::Compat;
    if (s == "packed") return codec::Sublayout::Packed;
    bad_value("sublayout", s);
}

FeatureKind parse_features(std::string_view s) {
    if (s == "center") return FeatureKind::Center;
    if (s == "mean") return FeatureKind::Mean;
    bad_value("features", s);
}

comms::ChannelConfig Config::channel() const {
    comms::ChannelConfig c;
    c.frequency = frequency;
    c.comm_range = range;
    c.capacity_mbps = capacity;
    c.mode = mode;
    c.sublayout = sublayout;
    c.volume = volume;
    return c;
}

void apply_setting(Config& cfg, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "volume") {
        if (value == "canonical")
            cfg.volume = Volume::canonical();
        else if (value == "reduced")
            cfg.volume = Volume::reduced();
        else
            bad_value(key, value);
    } else if (key == "origin") {
        cfg.volume.origin = to_vec3(key, value, false);
    } else if (key == "extent") {
        cfg.volume.extent = to_vec3(key, value, true);
    } else if (key == "voxel_high" || key == "voxel_medium" || key == "voxel_low") {
        const Level l = parse_level(key.substr(6));
        cfg.volume.voxel_sizes[static_cast<std::size_t>(l)] = to_vec3(key, value, true);
    } else if (key == "mode") {
        cfg.mode = parse_mode(value);
    } else if (key == "sublayout") {
        cfg.sublayout = parse_sublayout(value);
    } else if (key == "features") {
        cfg.features = parse_features(value);
    } else if (key == "frequency") {
        cfg.frequency = positive(key, value);
    } else if (key == "range") {
        cfg.range = positive(key, value);
    } else if (key == "capacity") {
        cfg.capacity = positive(key, value);
    } else if (key == "strategy") {
        try {
            cfg.strategy = comms::parse_strategy(std::string(value));
        } catch (const InvalidArgument&) {
            bad_value(key, value);
        }
    } else if (key == "seed") {
        cfg.seed = to_uint(key, value);
    } else if (key == "frames") {
        cfg.frames = to_uint(key, value);
    } else if (key == "points") {
        cfg.points = to_uint(key, value);
    } else if (key == "weights") {
        if (value.empty()) bad_value(key, value);
        cfg.weights_path = std::string(value);
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(to_uint(key, value));
    } else {
        throw InvalidArgument("unknown config key '" + std::string(key) + "'");
    }
}

Config parse_config(std::string_view text) {
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string_view l = line;
        if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) throw InvalidArgument("expected key = value, got '" + std::string(l) + "'");
        apply_setting(cfg, trim(l.substr(0, eq)), l.substr(eq + 1));
    }
    // Fail early on volumes whose extents do not divide into every level.
    for (Level lv : kAllLevels) (void)cfg.volume.spec(lv);
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace voxfuse
