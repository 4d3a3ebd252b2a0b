// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "voxfuse/comms.hpp"
#include "voxfuse/errors.hpp"
#include "voxfuse/point_cloud_io.hpp"

namespace voxfuse::comms {
namespace {

namespace fs = std::filesystem;

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_scenario(const std::string& path, std::span<const ScenarioFrame> frames) {
    const fs::path file(path);
    const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
    const std::string stem = file.stem().string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# voxfuse scenario v1\n";
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& frame = frames[f];
        out << "frame " << frame.timestamp_us << ' ' << frame.ego_id << '\n';
        for (const auto& v : frame.vehicles) {
            const std::string cloud = stem + "_f" + std::to_string(f) + "_v" + std::to_string(v.id) + ".pcf";
            write_point_cloud((dir / cloud).string(), v.cloud);
            out << "vehicle " << v.id;
            for (double r : v.pose.rotation) out << ' ' << exact(r);
            for (double t : v.pose.translation) out << ' ' << exact(t);
            out << ' ' << cloud << '\n';
        }
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<ScenarioFrame> read_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    const fs::path file(path);
    const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");

    std::vector<ScenarioFrame> frames;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        auto fail = [&](const std::string& why) {
            throw CorruptPayload(path + ":" + std::to_string(lineno) + ": " + why);
        };
        if (kind == "frame") {
            ScenarioFrame f;
            if (!(ls >> f.timestamp_us >> f.ego_id)) fail("malformed frame line");
            frames.push_back(std::move(f));
        } else if (kind == "vehicle") {
            if (frames.empty()) fail("vehicle before any frame");
            Vehicle v;
            Mat3 rot{};
            Vec3 t{};
            std::string cloud;
            if (!(ls >> v.id)) fail("malformed vehicle id");
            for (double& r : rot)
                if (!(ls >> r)) fail("malformed pose");
            for (double& x : t)
                if (!(ls >> x)) fail("malformed pose");
            if (!(ls >> cloud)) fail("missing point cloud path");
            try {
                v.pose = Pose::checked(rot, t);
            } catch (const InvalidArgument& e) {
                fail(e.what());
            }
            const fs::path cloud_path = fs::path(cloud).is_absolute() ? fs::path(cloud) : dir / cloud;
            const PointCloud pc = read_point_cloud(cloud_path.string());
            v.cloud = PointCloud(pc.points(), v.pose);
            frames.back().vehicles.push_back(std::move(v));
        } else {
            fail("unknown record '" + kind + "'");
        }
    }
    for (const auto& f : frames) f.validate();
    return frames;
}

}  // namespace voxfuse::comms
