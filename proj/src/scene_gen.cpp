// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "voxfuse/comms.hpp"
#include "voxfuse/errors.hpp"

namespace voxfuse::comms {
namespace {

constexpr double kSensorHeight = 1.7;
constexpr double kMaxRange = 120.0;
constexpr int kBeams = 32;
constexpr double kLowestBeamDeg = -25.0;
constexpr double kHighestBeamDeg = 3.0;
constexpr double kWallHeight = 12.0;

struct Box {
    Vec3 center;
    Vec3 half;
    double yaw = 0.0;
    int owner = -1;  // index of the scene vehicle this box belongs to, -1 for parked cars
};

struct Scene {
    std::vector<Box> boxes;
    double wall_left = 0.0;
    double wall_right = 0.0;
};

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    double intensity_lo = 0.0;
    double intensity_hi = 0.0;
};

std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Box& b) {
    const double c = std::cos(-b.yaw);
    const double s = std::sin(-b.yaw);
    const Vec3 rel = o - b.center;
    const Vec3 lo{c * rel[0] - s * rel[1], s * rel[0] + c * rel[1], rel[2]};
    const Vec3 ld{c * d[0] - s * d[1], s * d[0] + c * d[1], d[2]};
    double t0 = 0.0;
    double t1 = kMaxRange;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(ld[a]) < 1e-12) {
            if (std::abs(lo[a]) > b.half[a]) return std::nullopt;
            continue;
        }
        double ta = (-b.half[a] - lo[a]) / ld[a];
        double tb = (b.half[a] - lo[a]) / ld[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return t0 > 0.0 ? std::optional<double>(t0) : std::nullopt;
}

Hit cast(const Scene& scene, int self, const Vec3& o, const Vec3& d) {
    Hit hit;
    auto consider = [&](double t, double lo, double hi) {
        if (t > 0.0 && t <= kMaxRange && t < hit.t) hit = {t, lo, hi};
    };
    if (d[2] < 0.0) consider(-o[2] / d[2], 0.05, 0.3);
    for (double wall : {scene.wall_left, scene.wall_right}) {
        if (std::abs(d[1]) < 1e-12) continue;
        const double t = (wall - o[1]) / d[1];
        const double z = o[2] + t * d[2];
        if (z >= 0.0 && z <= kWallHeight) consider(t, 0.3, 0.6);
    }
    for (const Box& b : scene.boxes) {
        if (b.owner == self) continue;
        if (auto t = ray_box(o, d, b)) consider(*t, 0.5, 1.0);
    }
    return hit;
}

PointCloud scan(const Scene& scene, int self, const Pose& pose, std::size_t rays, Rng& rng) {
    std::vector<Point> points;
    if (rays == 0) return PointCloud({}, pose);
    const std::size_t azimuths = std::max<std::size_t>(1, rays / kBeams);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi / static_cast<double>(azimuths));
    points.reserve(azimuths * kBeams);
    for (int beam = 0; beam < kBeams; ++beam) {
        const double elev = (kLowestBeamDeg + (kHighestBeamDeg - kLowestBeamDeg) * beam / (kBeams - 1)) *
                            std::numbers::pi / 180.0;
        for (std::size_t a = 0; a < azimuths; ++a) {
            const double az = phase + 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(azimuths);
            const Vec3 local{std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev)};
            const Hit hit = cast(scene, self, pose.translation, multiply(pose.rotation, local));
            const double noise = rng.uniform(-0.02, 0.02);
            const double intensity = rng.uniform(0.0, 1.0);
            if (!std::isfinite(hit.t)) continue;
            const double r = hit.t + noise;
            points.push_back({r * local[0], r * local[1], r * local[2],
                              hit.intensity_lo + (hit.intensity_hi - hit.intensity_lo) * intensity});
        }
    }
    return PointCloud(std::move(points), pose);
}

}  // namespace

ScenarioFrame gen_scene(std::uint64_t seed, int n_vehicles, std::size_t points_per_vehicle) {
    if (n_vehicles < 2 || n_vehicles > 7) throw InvalidArgument("n_vehicles must lie in [2, 7]");
    Rng rng(seed);
    Scene scene;
    scene.wall_left = rng.uniform(10.0, 14.0);
    scene.wall_right = -rng.uniform(10.0, 14.0);

    std::vector<Pose> poses;
    double x = 0.0;
    for (int i = 0; i < n_vehicles; ++i) {
        const bool eastbound = rng.below(2) == 0;
        const double y = (eastbound ? -1.75 : 1.75) + rng.uniform(-0.4, 0.4);
        const double yaw = (eastbound ? 0.0 : std::numbers::pi) + rng.uniform(-0.05, 0.05);
        poses.push_back(Pose::from_yaw(yaw, {x, y, kSensorHeight}));
        scene.boxes.push_back({{x, y, 0.95}, {2.25, 0.9, 0.75}, yaw, i});
        x += rng.uniform(15.0, 35.0);
    }
    const double span = x;
    for (int p = 0; p < 24; ++p) {
        const double px = rng.uniform(-120.0, span + 120.0);
        const double side = rng.below(2) == 0 ? 5.5 : -5.5;
        scene.boxes.push_back({{px, side + rng.uniform(-0.3, 0.3), 0.8}, {2.2, 0.9, 0.8}, rng.uniform(-0.1, 0.1), -1});
    }

    ScenarioFrame frame;
    frame.ego_id = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(n_vehicles)) + 1);
    for (int i = 0; i < n_vehicles; ++i) {
        Vehicle v;
        v.id = static_cast<std::uint32_t>(i + 1);
        v.pose = poses[static_cast<std::size_t>(i)];
        v.cloud = scan(scene, i, v.pose, points_per_vehicle, rng);
        frame.vehicles.push_back(std::move(v));
    }
    return frame;
}

std::vector<ScenarioFrame> gen_scenario(std::uint64_t seed, std::size_t frames, std::size_t points_per_vehicle,
                                        double frequency) {
    if (!(frequency > 0.0)) throw InvalidArgument("frequency must be positive");
    Rng rng(seed);
    std::vector<ScenarioFrame> out;
    out.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const int n = 2 + static_cast<int>(rng.below(6));
        ScenarioFrame f = gen_scene(rng.next(), n, points_per_vehicle);
        f.timestamp_us = static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * 1e6 / frequency));
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace voxfuse::comms
