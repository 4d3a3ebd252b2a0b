// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/comms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "voxfuse/errors.hpp"

namespace voxfuse::comms {

void ScenarioFrame::validate() const {
    if (vehicles.size() < 2 || vehicles.size() > 7) throw InvalidArgument("a frame holds between 2 and 7 vehicles");
    std::set<std::uint32_t> ids;
    for (const auto& v : vehicles)
        if (!ids.insert(v.id).second) throw InvalidArgument("duplicate vehicle id " + std::to_string(v.id));
    if (!ids.count(ego_id)) throw InvalidArgument("ego vehicle missing from frame");
}

const Vehicle& ScenarioFrame::ego() const {
    for (const auto& v : vehicles)
        if (v.id == ego_id) return v;
    throw InvalidArgument("ego vehicle missing from frame");
}

void ChannelConfig::validate() const {
    if (!(frequency > 0.0)) throw InvalidArgument("frequency must be positive");
    if (!(comm_range > 0.0)) throw InvalidArgument("communication range must be positive");
    if (capacity_mbps && !(*capacity_mbps > 0.0)) throw InvalidArgument("capacity must be positive");
}

std::string to_string(const Strategy& s) {
    switch (s.kind) {
        case StrategyKind::Uniform: return "uniform";
        case StrategyKind::Budget: return "budget";
        case StrategyKind::Fixed: return std::string(voxfuse::to_string(s.fixed_level));
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    if (name == "uniform") return Strategy::uniform();
    if (name == "budget") return Strategy::budget();
    return Strategy::fixed(parse_level(name));
}

double planar_distance(const Pose& a, const Pose& b) {
    return std::hypot(a.translation[0] - b.translation[0], a.translation[1] - b.translation[1]);
}

std::vector<std::uint32_t> filter_in_range(const Pose& ego, std::span<const std::pair<std::uint32_t, Pose>> others,
                                           double range_m) {
    if (!(range_m > 0.0)) throw InvalidArgument("range must be positive");
    std::vector<std::uint32_t> ids;
    for (const auto& [id, pose] : others)
        if (planar_distance(ego, pose) <= range_m) ids.push_back(id);
    return ids;
}

Assignment assign_uniform(std::span<const std::uint32_t> ids, Rng& rng) {
    std::vector<std::uint32_t> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    Assignment a;
    for (std::uint32_t id : sorted) a[id] = kAllLevels[rng.below(3)];
    return a;
}

Assignment assign_uniform(std::span<const std::uint32_t> ids, std::uint64_t seed) {
    Rng rng(seed);
    return assign_uniform(ids, rng);
}

double projected_mbps(const Assignment& a, std::span<const BudgetCandidate> candidates, double frequency) {
    std::uint64_t bytes = 0;
    for (const auto& c : candidates)
        if (auto it = a.find(c.id); it != a.end()) bytes += c.cost[static_cast<std::size_t>(it->second)];
    return codec::bandwidth_mbps(static_cast<double>(bytes), frequency);
}

Assignment assign_budget(std::span<const BudgetCandidate> candidates, double capacity_mbps, double frequency) {
    if (!(capacity_mbps > 0.0)) throw InvalidArgument("capacity must be positive");
    std::vector<BudgetCandidate> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.id > b.id; });

    Assignment a;
    for (const auto& c : order) a[c.id] = Level::High;
    auto fits = [&] { return projected_mbps(a, candidates, frequency) <= capacity_mbps; };

    auto degrade = [&] {
        for (Level target : {Level::Medium, Level::Low})
            for (const auto& c : order) {
                if (fits()) return;
                a[c.id] = target;
            }
        if (fits()) return;
        std::vector<BudgetCandidate> far = order;
        std::sort(far.begin(), far.end(), [](const auto& x, const auto& y) {
            return x.distance != y.distance ? x.distance > y.distance : x.id > y.id;
        });
        for (const auto& c : far) {
            if (fits()) return;
            a.erase(c.id);
        }
    };
    degrade();

    // Raise CAVs one level at a time, lowest id first, until nothing more fits.
    for (bool raised = true; raised;) {
        raised = false;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto cur = a.find(it->id);
            if (cur != a.end() && cur->second == Level::High) continue;
            const Level before = cur == a.end() ? Level::Low : cur->second;
            const Level up = cur == a.end() ? Level::Low : static_cast<Level>(static_cast<int>(before) - 1);
            a[it->id] = up;
            if (fits()) {
                raised = true;
            } else if (cur == a.end()) {
                a.erase(it->id);
            } else {
                a[it->id] = before;
            }
        }
    }
    return a;
}

codec::VoxelGridMessage build_message(const Vehicle& v, Level level, std::uint64_t timestamp_us,
                                      const ChannelConfig& cfg) {
    const GridSpec spec = cfg.volume.spec(level);
    codec::VoxelGridMessage m;
    m.sender_id = v.id;
    m.timestamp_us = timestamp_us;
    m.sender_pose = v.pose;
    m.payload = cfg.mode == codec::Mode::CoordsPlusMeanFeatures ? mean_features(v.cloud, spec) : voxelize(v.cloud, spec);
    return codec::quantize_for_wire(std::move(m));
}

CollectiveInput receive(std::span<const std::uint8_t> bytes, const Pose& ego_pose, const Volume& volume) {
    const codec::VoxelGridMessage m = codec::decode(bytes);
    const Level level = m.spec().level;
    return {level, regrid(m.payload, relative_pose(ego_pose, m.sender_pose), volume.spec(level))};
}

StepResult step(const ScenarioFrame& frame, const ChannelConfig& cfg, const Strategy& strategy, Rng& rng,
                const StepOptions& options) {
    frame.validate();
    cfg.validate();
    if (options.pinned_sizes && options.weights)
        throw InvalidArgument("pinned message sizes cannot drive a forward pass");

    const Vehicle& ego = frame.ego();
    std::vector<std::pair<std::uint32_t, Pose>> others;
    std::map<std::uint32_t, const Vehicle*> by_id;
    for (const auto& v : frame.vehicles) {
        if (v.id == frame.ego_id) continue;
        others.emplace_back(v.id, v.pose);
        by_id[v.id] = &v;
    }
    const std::vector<std::uint32_t> in_range = filter_in_range(ego.pose, others, cfg.comm_range);

    // Encoded messages keyed by (id, level), filled lazily.
    std::map<std::pair<std::uint32_t, Level>, std::vector<std::uint8_t>> encoded;
    auto message_bytes = [&](std::uint32_t id, Level level) -> std::uint64_t {
        if (options.pinned_sizes) return (*options.pinned_sizes)[static_cast<std::size_t>(level)];
        auto key = std::make_pair(id, level);
        auto it = encoded.find(key);
        if (it == encoded.end())
            it = encoded
                     .emplace(key, codec::encode(build_message(*by_id.at(id), level, frame.timestamp_us, cfg), cfg.mode,
                                                 cfg.sublayout))
                     .first;
        return it->second.size();
    };

    Assignment assignment;
    switch (strategy.kind) {
        case StrategyKind::Uniform: assignment = assign_uniform(in_range, rng); break;
        case StrategyKind::Fixed:
            for (std::uint32_t id : in_range) assignment[id] = strategy.fixed_level;
            break;
        case StrategyKind::Budget: {
            if (!cfg.capacity_mbps) throw InvalidArgument("budget strategy requires a capacity");
            std::vector<BudgetCandidate> candidates;
            for (std::uint32_t id : in_range) {
                BudgetCandidate c{id, planar_distance(ego.pose, by_id.at(id)->pose), {}};
                for (Level l : kAllLevels) c.cost[static_cast<std::size_t>(l)] = message_bytes(id, l);
                candidates.push_back(c);
            }
            assignment = assign_budget(candidates, *cfg.capacity_mbps, cfg.frequency);
            break;
        }
    }

    StepResult result;
    FrameReport& report = result.report;
    report.timestamp_us = frame.timestamp_us;
    report.in_range = in_range.size();
    report.dropped = others.size() - in_range.size();
    report.unassigned = in_range.size() - assignment.size();
    report.assignment = assignment;
    for (const auto& [id, level] : assignment) {
        const std::uint64_t bytes = message_bytes(id, level);
        report.messages.push_back({id, level, bytes});
        report.total_bytes += bytes;
    }
    report.bandwidth_mbps = codec::bandwidth_mbps(static_cast<double>(report.total_bytes), cfg.frequency);

    if (options.weights) {
        for (const auto& [id, level] : assignment)
            result.received.push_back(receive(encoded.at({id, level}), ego.pose, cfg.volume));
        result.forward = forward(ego.cloud, result.received, *options.weights, {cfg.volume, options.features});
    }
    return result;
}

AggregateReport aggregate(std::vector<FrameReport> frames, double frequency) {
    AggregateReport r;
    double frame_sum = 0.0;
    double message_sum = 0.0;
    for (const auto& f : frames) {
        frame_sum += f.bandwidth_mbps;
        r.max_frame_mbps = std::max(r.max_frame_mbps, f.bandwidth_mbps);
        r.total_bytes += f.total_bytes;
        for (const auto& m : f.messages) {
            ++r.messages;
            ++r.level_usage[static_cast<std::size_t>(m.level)];
            message_sum += codec::bandwidth_mbps(static_cast<double>(m.bytes), frequency);
        }
    }
    if (!frames.empty()) r.mean_frame_mbps = frame_sum / static_cast<double>(frames.size());
    if (r.messages) r.mean_message_mbps = message_sum / static_cast<double>(r.messages);
    r.frames = std::move(frames);
    return r;
}

AggregateReport simulate(std::span<const ScenarioFrame> scenario, const ChannelConfig& cfg, const Strategy& strategy,
                         std::uint64_t seed, const StepOptions& options) {
    if (scenario.empty()) throw InvalidArgument("scenario has no frames");
    Rng rng(seed);
    std::vector<FrameReport> reports;
    reports.reserve(scenario.size());
    for (const auto& frame : scenario) reports.push_back(step(frame, cfg, strategy, rng, options).report);
    return aggregate(std::move(reports), cfg.frequency);
}

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string format_report(const AggregateReport& r) {
    std::ostringstream out;
    out << "frames=" << r.frames.size() << '\n';
    out << "messages=" << r.messages << '\n';
    out << "total_bytes=" << r.total_bytes << '\n';
    out << "mean_frame_mbps=" << fixed6(r.mean_frame_mbps) << '\n';
    out << "max_frame_mbps=" << fixed6(r.max_frame_mbps) << '\n';
    out << "mean_message_mbps=" << fixed6(r.mean_message_mbps) << '\n';
    out << "mean_message_mbps_display=" << codec::truncate_one_decimal(r.mean_message_mbps) << '\n';
    out << "max_frame_mbps_display=" << codec::truncate_one_decimal(r.max_frame_mbps) << '\n';
    for (Level l : kAllLevels)
        out << "level_" << voxfuse::to_string(l) << '=' << r.level_usage[static_cast<std::size_t>(l)] << '\n';
    return out.str();
}

std::string format_frame_table(const AggregateReport& r) {
    std::ostringstream out;
    out << "frame\ttimestamp_us\tin_range\tdropped\tunassigned\ttotal_bytes\tbandwidth_mbps\tassignment\n";
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
        const auto& f = r.frames[i];
        out << i << '\t' << f.timestamp_us << '\t' << f.in_range << '\t' << f.dropped << '\t' << f.unassigned << '\t'
            << f.total_bytes << '\t' << fixed6(f.bandwidth_mbps) << '\t';
        bool first = true;
        for (const auto& m : f.messages) {
            out << (first ? "" : ",") << m.id << ':' << voxfuse::to_string(m.level) << ':' << m.bytes;
            first = false;
        }
        if (first) out << '-';
        out << '\n';
    }
    return out.str();
}

}  // namespace voxfuse::comms
