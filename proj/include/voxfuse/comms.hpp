// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voxfuse/backbone.hpp"
#include "voxfuse/codec.hpp"
#include "voxfuse/grid.hpp"
#include "voxfuse/rng.hpp"

namespace voxfuse::comms {

struct Vehicle {
    std::uint32_t id = 0;
    /// Sensor pose in world coordinates.
    Pose pose;
    /// Points in the sensor frame.
    PointCloud cloud;
};

struct ScenarioFrame {
    std::uint64_t timestamp_us = 0;
    std::uint32_t ego_id = 0;
    std::vector<Vehicle> vehicles;

    /// Unique ids, 2-7 vehicles, ego present. Throws InvalidArgument.
    void validate() const;
    const Vehicle& ego() const;
};

struct ChannelConfig {
    double frequency = 10.0;
    double comm_range = 70.0;
    /// Budget for the greedy strategy, Mbit/s.
    std::optional<double> capacity_mbps;
    codec::Mode mode = codec::Mode::CoordsOnly;
    codec::Sublayout sublayout = codec::Sublayout::Compat;
    Volume volume = Volume::canonical();

    void validate() const;
};

using Assignment = std::map<std::uint32_t, Level>;

enum class StrategyKind : std::uint8_t { Uniform, Budget, Fixed };

struct Strategy {
    StrategyKind kind = StrategyKind::Uniform;
    /// Only used by Fixed: every in-range CAV streams at this level.
    Level fixed_level = Level::High;

    static Strategy uniform() { return {StrategyKind::Uniform, Level::High}; }
    static Strategy budget() { return {StrategyKind::Budget, Level::High}; }
    static Strategy fixed(Level l) { return {StrategyKind::Fixed, l}; }
};

std::string to_string(const Strategy& s);
/// "uniform", "budget", "high", "medium", "low".
Strategy parse_strategy(const std::string& name);

/// Distance between the poses' translations in the x-y plane.
double planar_distance(const Pose& a, const Pose& b);

/// Ids whose planar distance to the ego is <= range_m, in input order.
std::vector<std::uint32_t> filter_in_range(const Pose& ego, std::span<const std::pair<std::uint32_t, Pose>> others,
                                           double range_m);

/// One independent draw per id, in ascending id order.
Assignment assign_uniform(std::span<const std::uint32_t> ids, Rng& rng);
Assignment assign_uniform(std::span<const std::uint32_t> ids, std::uint64_t seed);

struct BudgetCandidate {
    std::uint32_t id = 0;
    double distance = 0.0;
    /// Message bytes at High, Medium, Low.
    std::array<std::uint64_t, 3> cost{};
};

/// Total bandwidth of an assignment, Mbit/s.
double projected_mbps(const Assignment& a, std::span<const BudgetCandidate> candidates, double frequency);

/// Greedy: start all High; degrade to Medium one CAV at a time in descending id order, then to Low
/// in the same order, stopping as soon as the total fits. If all-Low still exceeds the capacity,
/// drop the farthest CAVs (ties: larger id first) until it fits.
Assignment assign_budget(std::span<const BudgetCandidate> candidates, double capacity_mbps, double frequency);

struct CavMessage {
    std::uint32_t id = 0;
    Level level = Level::High;
    std::uint64_t bytes = 0;

    friend bool operator==(const CavMessage&, const CavMessage&) = default;
};

struct FrameReport {
    std::uint64_t timestamp_us = 0;
    std::vector<CavMessage> messages;
    std::uint64_t total_bytes = 0;
    double bandwidth_mbps = 0.0;
    Assignment assignment;
    std::size_t in_range = 0;
    /// CAVs beyond the communication range.
    std::size_t dropped = 0;
    /// In-range CAVs the budget strategy could not fit.
    std::size_t unassigned = 0;

    friend bool operator==(const FrameReport&, const FrameReport&) = default;
};

/// Per-level message sizes used instead of encoding, e.g. the reference averages
/// {180000, 111000, 54500} bytes.
using SizeTable = std::array<std::uint64_t, 3>;

struct StepOptions {
    /// When set, received grids run through the backbone.
    const BackboneWeights* weights = nullptr;
    FeatureKind features = FeatureKind::Center;
    /// When set, message bytes come from this table and no grids are built.
    std::optional<SizeTable> pinned_sizes;
};

struct StepResult {
    FrameReport report;
    std::vector<CollectiveInput> received;
    std::optional<ForwardResult> forward;
};

/// Voxelizes a CAV cloud in its own frame at `level` and wraps it for the wire.
codec::VoxelGridMessage build_message(const Vehicle& v, Level level, std::uint64_t timestamp_us,
                                      const ChannelConfig& cfg);
/// Decodes a message and regrids it into the ego frame at its level.
CollectiveInput receive(std::span<const std::uint8_t> bytes, const Pose& ego_pose, const Volume& volume);

StepResult step(const ScenarioFrame& frame, const ChannelConfig& cfg, const Strategy& strategy, Rng& rng,
                const StepOptions& options = {});

struct AggregateReport {
    std::vector<FrameReport> frames;
    std::size_t messages = 0;
    std::uint64_t total_bytes = 0;
    double mean_frame_mbps = 0.0;
    double max_frame_mbps = 0.0;
    /// Mean bandwidth of one sending vehicle, over every message sent.
    double mean_message_mbps = 0.0;
    /// Messages per level: High, Medium, Low.
    std::array<std::size_t, 3> level_usage{};
};

AggregateReport aggregate(std::vector<FrameReport> frames, double frequency);

/// Throws InvalidArgument on an empty scenario.
AggregateReport simulate(std::span<const ScenarioFrame> scenario, const ChannelConfig& cfg, const Strategy& strategy,
                         std::uint64_t seed, const StepOptions& options = {});

/// key=value lines.
std::string format_report(const AggregateReport& r);
/// Tab-separated per-frame table with a header row.
std::string format_frame_table(const AggregateReport& r);

inline constexpr std::size_t kDefaultPointsPerVehicle = 57600;

/// Deterministic street scene: vehicles in two lanes with jittered spacing, parked cars and
/// building facades, each vehicle scanned by a simulated 32-beam LiDAR out to 120 m.
/// points_per_vehicle sets the number of rays; 0 yields pose-only vehicles.
ScenarioFrame gen_scene(std::uint64_t seed, int n_vehicles, std::size_t points_per_vehicle = kDefaultPointsPerVehicle);

/// `frames` scenes with 2-7 vehicles each, timestamps at 1 / frequency spacing.
std::vector<ScenarioFrame> gen_scenario(std::uint64_t seed, std::size_t frames, std::size_t points_per_vehicle,
                                        double frequency = 10.0);

// Scenario files are plain text:
//   # voxfuse scenario v1
//   frame <timestamp_us> <ego_id>
//   vehicle <id> <r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz> <cloud.pcf>
// Cloud paths are relative to the scenario file.
void write_scenario(const std::string& path, std::span<const ScenarioFrame> frames);
std::vector<ScenarioFrame> read_scenario(const std::string& path);

}  // namespace voxfuse::comms
