// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "voxfuse/backbone.hpp"
#include "voxfuse/codec.hpp"
#include "voxfuse/comms.hpp"
#include "voxfuse/config.hpp"
#include "voxfuse/dense_reference.hpp"
#include "voxfuse/detail/byte_io.hpp"
#include "voxfuse/errors.hpp"
#include "voxfuse/golden.hpp"
#include "voxfuse/hash.hpp"
#include "voxfuse/parallel.hpp"
#include "voxfuse/point_cloud_io.hpp"

namespace fs = std::filesystem;
using namespace voxfuse;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Options shared by every subcommand. Flags are applied on top of the config file.
struct Common {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void add_to(CLI::App* app, std::initializer_list<const char*> keys) {
        app->add_option("--config", config_path, "key = value configuration file");
        for (const char* key : keys) {
            std::string flag = std::string("--") + key;
            app->add_option_function<std::string>(
                flag, [this, k = std::string(key)](const std::string& v) { overrides[k] = v; },
                "overrides `" + std::string(key) + "` from the config");
        }
    }

    Config load() const {
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
        if (cfg.threads > 0) set_num_threads(cfg.threads);
        return cfg;
    }
};

std::string shape_string(const Extent3& s) {
    return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]);
}

Pose parse_pose(const std::string& text) {
    std::istringstream in(text);
    std::array<double, 12> v{};
    for (double& x : v)
        if (!(in >> x)) throw UsageError("--ego-pose expects 12 numbers: 9 rotation (row-major) then 3 translation");
    Mat3 r{};
    std::copy(v.begin(), v.begin() + 9, r.begin());
    return Pose::checked(r, {v[9], v[10], v[11]});
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != item.size()) throw UsageError(std::string("bad ") + what + " list: " + text);
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
    return out;
}

BackboneWeights weights_for(const Config& cfg) {
    const int in = feature_channels(cfg.features);
    if (cfg.weights_path) {
        BackboneWeights w = load_weights(*cfg.weights_path);
        if (w.in_channels != in)
            throw SpecMismatch("weights expect " + std::to_string(w.in_channels) + " input channels, features give " +
                               std::to_string(in));
        return w;
    }
    return init_weights(cfg.seed, in);
}

// voxelize -------------------------------------------------------------------

struct VoxelizeArgs {
    Common common;
    std::string input;
    std::string output;
    std::string level = "high";
    std::uint32_t sender_id = 0;
    std::uint64_t timestamp = 0;
};

int cmd_voxelize(const VoxelizeArgs& a) {
    const Config cfg = a.common.load();
    const GridSpec spec = cfg.volume.spec(parse_level(a.level));
    const PointCloud pc = read_point_cloud(a.input);

    VoxelizeStats stats;
    SparseVoxelGrid grid = voxelize(pc, spec, &stats);
    if (cfg.mode == codec::Mode::CoordsPlusMeanFeatures) grid = mean_features(pc, spec);

    codec::VoxelGridMessage m;
    m.sender_id = a.sender_id;
    m.timestamp_us = a.timestamp;
    m.payload = std::move(grid);
    const auto bytes = codec::encode(codec::quantize_for_wire(std::move(m)), cfg.mode, cfg.sublayout);
    detail::write_file(a.output, bytes);

    std::printf("points=%zu\ndropped=%zu\nvoxels=%zu\npayload_bytes=%zu\nmessage_bytes=%zu\n", stats.points,
                stats.dropped, stats.voxels, codec::payload_size(stats.voxels, cfg.mode, cfg.sublayout), bytes.size());
    return 0;
}

// bandwidth ------------------------------------------------------------------

struct BandwidthArgs {
    Common common;
    std::vector<std::string> inputs;
};

int cmd_bandwidth(const BandwidthArgs& a) {
    const Config cfg = a.common.load();
    double sum = 0.0;
    std::printf("input\tbytes\tmbps\tdisplay\n");
    for (const std::string& in : a.inputs) {
        double bytes = 0.0;
        std::size_t pos = 0;
        try {
            bytes = std::stod(in, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != in.size() || pos == 0) {
            std::error_code ec;
            const auto size = fs::file_size(in, ec);
            if (ec) throw IoError("cannot stat " + in + ": " + ec.message());
            bytes = static_cast<double>(size);
        } else if (!(bytes >= 0.0)) {
            throw UsageError("byte counts must be non-negative: " + in);
        }
        const codec::SizeReport r = codec::bandwidth(bytes, cfg.frequency);
        sum += r.bandwidth_mbps;
        std::printf("%s\t%.17g\t%.6f\t%s\n", in.c_str(), bytes, r.bandwidth_mbps, r.display().c_str());
    }
    const double mean = sum / static_cast<double>(a.inputs.size());
    std::printf("mean\t-\t%.6f\t%s\n", mean, codec::truncate_one_decimal(mean).c_str());
    return 0;
}

// forward --------------------------------------------------------------------

struct ForwardArgs {
    Common common;
    std::string ego;
    std::vector<std::string> cavs;
    std::string ego_pose;
    std::string output;
};

int cmd_forward(const ForwardArgs& a) {
    const Config cfg = a.common.load();
    const Pose ego_pose = a.ego_pose.empty() ? Pose::identity() : parse_pose(a.ego_pose);
    const PointCloud raw = read_point_cloud(a.ego);
    const PointCloud ego(raw.points(), ego_pose);
    const BackboneWeights w = weights_for(cfg);

    std::vector<CollectiveInput> collective;
    for (const std::string& path : a.cavs) collective.push_back(comms::receive(detail::read_file(path), ego_pose, cfg.volume));

    const ForwardResult r = forward(ego, collective, w, {cfg.volume, cfg.features});
    const auto bytes = encode_bev(r.bev);
    if (!a.output.empty()) detail::write_file(a.output, bytes);

    std::printf("stage\tshape\tchannels\tactive\tms\n");
    for (const StageStats& s : r.stages)
        std::printf("%s\t%s\t%zu\t%zu\t%.3f\n", s.name.c_str(), shape_string(s.shape).c_str(), s.channels, s.active,
                    s.millis);
    std::printf("bev_shape=%dx%dx%d\n", r.bev.width, r.bev.height, r.bev.channels);
    std::printf("bev_sha256=%s\n", sha256_hex(bytes).c_str());
    std::printf("threads=%d\n", max_threads());
    return 0;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string scenario;
    std::optional<std::uint64_t> synthetic;
    std::string pinned;
    bool run_backbone = false;
    std::string report_path;
    std::string table_path;
};

int cmd_simulate(const SimulateArgs& a) {
    const Config cfg = a.common.load();
    if (a.scenario.empty() == !a.synthetic) throw UsageError("give exactly one of --scenario or --synthetic");
    if (cfg.frames == 0) throw UsageError("frames must be positive");

    std::vector<comms::ScenarioFrame> frames;
    if (a.synthetic) {
        const std::size_t points = a.pinned.empty() ? cfg.points : 0;
        frames = comms::gen_scenario(*a.synthetic, cfg.frames, points, cfg.frequency);
    } else {
        frames = comms::read_scenario(a.scenario);
        if (a.common.overrides.count("frames") && frames.size() > cfg.frames) frames.resize(cfg.frames);
    }

    comms::StepOptions opts;
    opts.features = cfg.features;
    if (!a.pinned.empty()) {
        const auto sizes = parse_list(a.pinned, "size");
        if (sizes.size() != 3) throw UsageError("--pinned-sizes expects high,medium,low");
        opts.pinned_sizes = comms::SizeTable{sizes[0], sizes[1], sizes[2]};
    }
    BackboneWeights w;
    if (a.run_backbone) {
        w = weights_for(cfg);
        opts.weights = &w;
    }

    const auto report = comms::simulate(frames, cfg.channel(), cfg.strategy, cfg.seed, opts);
    const std::string text = comms::format_report(report);
    std::fputs(text.c_str(), stdout);
    if (!a.report_path.empty()) detail::write_file(a.report_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    if (!a.table_path.empty()) {
        const std::string table = comms::format_frame_table(report);
        detail::write_file(a.table_path, std::span(reinterpret_cast<const std::uint8_t*>(table.data()), table.size()));
    }
    return 0;
}

// bench ----------------------------------------------------------------------

struct BenchArgs {
    std::string sizes = "16,32,64";
    std::size_t channels = 16;
    double density = 0.05;
    std::uint64_t seed = 1;
    int threads = 0;
};

int cmd_bench(const BenchArgs& a) {
    if (!(a.density > 0.0 && a.density <= 1.0)) throw UsageError("--density must be in (0, 1]");
    if (a.channels == 0) throw UsageError("--channels must be positive");
    if (a.threads > 0) set_num_threads(a.threads);
    using Clock = std::chrono::steady_clock;
    const auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

    struct Kernel {
        const char* name;
        ConvMode mode;
        int stride;
    };
    const Kernel kernels[] = {{"subm", ConvMode::Submanifold, 1},
                              {"sparse_s1", ConvMode::SparseStrided, 1},
                              {"sparse_s2", ConvMode::SparseStrided, 2}};

    std::printf("size\tkernel\tsites\trules\toracle_pairs\tout_sites\trulebook_ms\tconv_ms\trulebook_sites_per_s\tconv_sites_per_s\n");
    for (std::size_t n : parse_list(a.sizes, "size")) {
        if (n == 0 || n > 256) throw UsageError("bench sizes must be in [1, 256]");
        Rng rng(a.seed ^ (n * 0x9E3779B97F4A7C15ull));
        const auto side = static_cast<std::int32_t>(n);
        const SparseTensor input = golden::random_tensor(rng, {side, side, side}, a.channels, a.density);
        for (const Kernel& k : kernels) {
            ConvParams p(static_cast<int>(a.channels), static_cast<int>(a.channels), k.mode, k.stride);
            for (float& v : p.weights) v = static_cast<float>(rng.uniform(-0.1, 0.1));

            const auto t0 = Clock::now();
            const Rulebook rb = build_rulebook(input, p);
            const auto t1 = Clock::now();
            const SparseTensor out = sparse_conv(input, p, rb);
            const auto t2 = Clock::now();

            const double sites = static_cast<double>(input.size());
            const double rb_ms = ms(t1 - t0);
            const double conv_ms = ms(t2 - t1);
            // Clamp to one microsecond so empty or tiny inputs still report a finite rate.
            const double rb_rate = sites / (std::max(rb_ms, 1e-3) * 1e-3);
            const double conv_rate = sites / (std::max(conv_ms, 1e-3) * 1e-3);
            std::printf("%zu\t%s\t%zu\t%zu\t%zu\t%zu\t%.3f\t%.3f\t%.0f\t%.0f\n", n, k.name, input.size(), rb.rule_count(),
                        dense_reachable_pairs(input, k.mode, k.stride), out.size(), rb_ms, conv_ms, rb_rate, conv_rate);
        }
    }
    return 0;
}

// generators -----------------------------------------------------------------

struct GenCloudArgs {
    std::uint64_t seed = 7;
    int vehicles = 2;
    std::size_t points = comms::kDefaultPointsPerVehicle;
    std::string output;
};

int cmd_gen_cloud(const GenCloudArgs& a) {
    if (a.vehicles < 2 || a.vehicles > 7) throw UsageError("--vehicles must be in [2, 7]");
    const comms::ScenarioFrame f = comms::gen_scene(a.seed, a.vehicles, a.points);
    write_point_cloud(a.output, f.ego().cloud);
    std::printf("ego_id=%u\npoints=%zu\n", f.ego_id, f.ego().cloud.size());
    return 0;
}

struct GenScenarioArgs {
    Common common;
    std::uint64_t seed = 1;
    std::string output;
};

int cmd_gen_scenario(const GenScenarioArgs& a) {
    const Config cfg = a.common.load();
    if (cfg.frames == 0) throw UsageError("frames must be positive");
    const auto frames = comms::gen_scenario(a.seed, cfg.frames, cfg.points, cfg.frequency);
    comms::write_scenario(a.output, frames);
    std::size_t vehicles = 0;
    for (const auto& f : frames) vehicles += f.vehicles.size();
    std::printf("frames=%zu\nvehicles=%zu\n", frames.size(), vehicles);
    return 0;
}

struct GenWeightsArgs {
    std::uint64_t seed = 42;
    std::string features = "center";
    std::string output;
};

int cmd_gen_weights(const GenWeightsArgs& a) {
    const BackboneWeights w = init_weights(a.seed, feature_channels(parse_features(a.features)));
    const auto bytes = encode_weights(w);
    detail::write_file(a.output, bytes);
    std::printf("layers=%zu\nbytes=%zu\nsha256=%s\n", w.layers().size(), bytes.size(), sha256_hex(bytes).c_str());
    return 0;
}

// inspect --------------------------------------------------------------------

int cmd_inspect(const std::string& path) {
    const auto bytes = detail::read_file(path);
    const codec::VoxelGridMessage m = codec::decode(bytes);
    const codec::MessageHeader h = codec::peek_header(bytes);
    const GridSpec& s = m.spec();
    std::printf("sender_id=%u\ntimestamp_us=%llu\nlevel=%s\n", m.sender_id,
                static_cast<unsigned long long>(m.timestamp_us), std::string(to_string(s.level)).c_str());
    std::printf("mode=%s\nsublayout=%s\n", h.mode == codec::Mode::CoordsOnly ? "coords" : "mean",
                h.sublayout == codec::Sublayout::Compat ? "compat" : "packed");
    std::printf("origin=%.9g %.9g %.9g\nvoxel_size=%.9g %.9g %.9g\ndims=%s\n", s.origin[0], s.origin[1], s.origin[2],
                s.voxel_size[0], s.voxel_size[1], s.voxel_size[2], shape_string(s.dims).c_str());
    const Pose& p = m.sender_pose;
    std::printf("translation=%.9g %.9g %.9g\n", p.translation[0], p.translation[1], p.translation[2]);
    std::printf("voxels=%zu\nbytes=%zu\n", m.payload.size(), bytes.size());
    return 0;
}

// golden ---------------------------------------------------------------------

int cmd_golden(const std::string& dir, bool bless) {
    int mismatches = 0;
    for (const golden::Artifact& a : golden::build_artifacts()) {
        const fs::path path = fs::path(dir) / a.name;
        if (bless) {
            detail::write_file(path.string(), a.bytes);
            std::printf("blessed\t%s\t%zu\n", a.name.c_str(), a.bytes.size());
            continue;
        }
        const bool same = fs::exists(path) && detail::read_file(path.string()) == a.bytes;
        std::printf("%s\t%s\n", same ? "ok" : "MISMATCH", a.name.c_str());
        if (!same) ++mismatches;
    }
    return mismatches == 0 ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxfuse: multi-resolution sparse voxel sharing for collective perception"};
    app.require_subcommand(1);

    VoxelizeArgs vox;
    auto* c_vox = app.add_subcommand("voxelize", "voxelize a PCF1 cloud into an SVG1 message");
    c_vox->add_option("input", vox.input, "PCF1 point cloud")->required();
    c_vox->add_option("-o,--out", vox.output, "output SVG1 file")->required();
    c_vox->add_option("--level", vox.level, "high | medium | low");
    c_vox->add_option("--sender-id", vox.sender_id);
    c_vox->add_option("--timestamp", vox.timestamp, "microseconds");
    vox.common.add_to(c_vox, {"mode", "sublayout", "volume"});

    BandwidthArgs bw;
    auto* c_bw = app.add_subcommand("bandwidth", "bandwidth of byte counts or message files");
    c_bw->add_option("inputs", bw.inputs, "byte counts or files")->required();
    bw.common.add_to(c_bw, {"frequency"});

    ForwardArgs fw;
    auto* c_fw = app.add_subcommand("forward", "run the multi-resolution backbone and dump the BEV map");
    c_fw->add_option("--ego", fw.ego, "ego PCF1 cloud")->required();
    c_fw->add_option("--cav", fw.cavs, "received SVG1 messages");
    c_fw->add_option("--ego-pose", fw.ego_pose, "12 numbers: rotation row-major, translation");
    c_fw->add_option("-o,--out", fw.output, "output BEV1 file");
    fw.common.add_to(c_fw, {"volume", "features", "seed", "weights", "threads"});

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "run the bandwidth simulation over a scenario");
    c_sim->add_option("--scenario", sim.scenario, "scenario file");
    c_sim->add_option("--synthetic", sim.synthetic, "generate a synthetic scenario from this seed");
    c_sim->add_option("--pinned-sizes", sim.pinned, "high,medium,low message bytes instead of encoding");
    c_sim->add_flag("--backbone", sim.run_backbone, "run the backbone on every frame");
    c_sim->add_option("--report", sim.report_path, "write the key=value report here");
    c_sim->add_option("--table", sim.table_path, "write the per-frame table here");
    sim.common.add_to(c_sim, {"strategy", "capacity", "frequency", "range", "seed", "frames", "points", "mode",
                              "sublayout", "volume", "features", "weights", "threads"});

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "sparse convolution throughput");
    c_bench->add_option("--sizes", bench.sizes, "comma-separated cube sides");
    c_bench->add_option("--channels", bench.channels);
    c_bench->add_option("--density", bench.density);
    c_bench->add_option("--seed", bench.seed);
    c_bench->add_option("--threads", bench.threads);

    GenCloudArgs gc;
    auto* c_gc = app.add_subcommand("gen-cloud", "write the ego cloud of a synthetic scene");
    c_gc->add_option("--seed", gc.seed);
    c_gc->add_option("--vehicles", gc.vehicles);
    c_gc->add_option("--points", gc.points, "rays per vehicle");
    c_gc->add_option("-o,--out", gc.output)->required();

    GenScenarioArgs gs;
    auto* c_gs = app.add_subcommand("gen-scenario", "write a synthetic scenario with its clouds");
    c_gs->add_option("--seed", gs.seed);
    c_gs->add_option("-o,--out", gs.output)->required();
    gs.common.add_to(c_gs, {"frames", "points", "frequency"});

    GenWeightsArgs gwt;
    auto* c_gw = app.add_subcommand("gen-weights", "write seeded backbone weights");
    c_gw->add_option("--seed", gwt.seed);
    c_gw->add_option("--features", gwt.features, "center | mean");
    c_gw->add_option("-o,--out", gwt.output)->required();

    std::string inspect_path;
    auto* c_in = app.add_subcommand("inspect", "print an SVG1 message header");
    c_in->add_option("input", inspect_path)->required();

    std::string golden_dir;
    bool bless = false;
    auto* c_gold = app.add_subcommand("golden", "check or regenerate golden files");
    c_gold->add_option("--dir", golden_dir)->required();
    c_gold->add_flag("--bless", bless, "overwrite the golden files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (c_vox->parsed()) return cmd_voxelize(vox);
        if (c_bw->parsed()) return cmd_bandwidth(bw);
        if (c_fw->parsed()) return cmd_forward(fw);
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_bench->parsed()) return cmd_bench(bench);
        if (c_gc->parsed()) return cmd_gen_cloud(gc);
        if (c_gs->parsed()) return cmd_gen_scenario(gs);
        if (c_gw->parsed()) return cmd_gen_weights(gwt);
        if (c_in->parsed()) return cmd_inspect(inspect_path);
        if (c_gold->parsed()) return cmd_golden(golden_dir, bless);
    } catch (const UsageError& e) {
        std::cerr << "voxfuse: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "voxfuse: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "voxfuse: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
