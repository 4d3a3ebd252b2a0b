// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "voxfuse/backbone.hpp"
#include "voxfuse/codec.hpp"
#include "voxfuse/comms.hpp"
#include "voxfuse/dense_reference.hpp"
#include "voxfuse/detail/byte_io.hpp"
#include "voxfuse/golden.hpp"
#include "voxfuse/hash.hpp"
#include "voxfuse/point_cloud_io.hpp"

namespace fs = std::filesystem;
using namespace voxfuse;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

Verdict bandwidth_arithmetic() {
    Verdict v;
    const double kb[] = {914.9, 180.0, 111.0, 54.5};
    const char* shown[] = {"73.1", "14.4", "8.8", "4.3"};
    std::string got;
    for (int i = 0; i < 4; ++i) {
        const std::string d = codec::bandwidth(kb[i] * 1000.0, 10.0).display();
        got += (i ? " " : "") + d;
        v.require(d == shown[i], "size " + fmt(kb[i], 1) + " kB displayed " + d + ", want " + shown[i]);
    }
    if (v.ok) v.detail = "displayed " + got + " Mbit/s";
    return v;
}

Verdict dynamic_mean() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto frames = comms::gen_scenario(2026, 10000, 0);
    comms::StepOptions opts;
    opts.pinned_sizes = comms::SizeTable{180000, 111000, 54500};
    const auto r = comms::simulate(frames, comms::ChannelConfig{}, comms::Strategy::uniform(), 1, opts);
    const double secs = seconds_since(t0);
    v.require(r.frames.size() >= 10000, "fewer than 10000 frames");
    v.require(std::abs(r.mean_message_mbps - 9.2) <= 0.1, "mean " + fmt(r.mean_message_mbps, 4) + " outside 9.2 +- 0.1");
    v.require(secs < 10.0, "took " + fmt(secs, 2) + " s");
    if (v.ok)
        v.detail = "10000 frames, " + std::to_string(r.messages) + " messages, mean " + fmt(r.mean_message_mbps, 4) +
                   " Mbit/s per CAV (display " + codec::truncate_one_decimal(r.mean_message_mbps) + "), " +
                   fmt(secs, 2) + " s";
    return v;
}

Verdict point_count() {
    Verdict v;
    const double points = std::floor(914900.0 / static_cast<double>(codec::kRawBytesPerPoint));
    v.require(points == 57181.0, "got " + fmt(points, 0) + " points");
    v.require(codec::raw_point_cloud_size(57181) <= 914900 && codec::raw_point_cloud_size(57182) > 914900,
              "raw size inconsistent");
    const double rel = std::abs(points - 57000.0) / 57000.0;
    v.require(rel <= 0.005, "relative error " + fmt(rel * 100, 3) + " %");
    if (v.ok) v.detail = "57181 points, " + fmt(rel * 100, 3) + " % from 57000";
    return v;
}

Verdict conv_equivalence() {
    Verdict v;
    const auto t0 = Clock::now();
    Rng rng(4);
    int instances = 0;
    double worst = 0.0;
    while (instances < 1200 && v.ok) {
        const Extent3 shape{static_cast<std::int32_t>(1 + rng.below(12)), static_cast<std::int32_t>(1 + rng.below(12)),
                            static_cast<std::int32_t>(1 + rng.below(6))};
        const int cin = 1 + static_cast<int>(rng.below(8));
        const int cout = 1 + static_cast<int>(rng.below(8));
        const SparseTensor t = golden::random_tensor(rng, shape, static_cast<std::size_t>(cin), rng.uniform(0.02, 0.5));
        for (auto [mode, stride] : {std::pair{ConvMode::Submanifold, 1}, std::pair{ConvMode::SparseStrided, 1},
                                    std::pair{ConvMode::SparseStrided, 2}}) {
            ConvParams p(cin, cout, mode, stride);
            for (float& w : p.weights) w = static_cast<float>(rng.uniform(-1.0, 1.0));
            const SparseTensor out = sparse_conv(t, p);
            if (mode == ConvMode::Submanifold)
                v.require(out.coords() == t.coords(), "submanifold active set changed");
            else
                v.require(oracle::CoordSet(out.coords().begin(), out.coords().end()) == oracle::reachable_outputs(t, stride),
                          "strided active set differs from reachable outputs");
            const DenseVolume dense = dense_oracle(t, p);
            for (std::size_t i = 0; i < out.size(); ++i) {
                const auto expect = oracle::conv_at(t, p, out.coords()[i]);
                for (int co = 0; co < cout; ++co) {
                    worst = std::max(worst, std::abs(out.features().at(i, co) - expect[co]));
                    worst = std::max(worst, std::abs(dense.at(out.coords()[i], co) - expect[co]));
                }
            }
            ++instances;
        }
    }
    const double secs = seconds_since(t0);
    v.require(worst <= 1e-5, "max abs error " + std::to_string(worst));
    v.require(secs < 60.0, "took " + fmt(secs, 1) + " s");
    if (v.ok)
        v.detail = std::to_string(instances) + " instances, max abs error " + std::to_string(worst) + ", " +
                   fmt(secs, 2) + " s";
    return v;
}

Verdict shape_pipeline() {
    Verdict v;
    const ShapePlan plan = plan_shapes(Volume::canonical());
    const Extent3 meet{700, 200, 5};
    for (Stream s : kAllStreams) v.require(plan.blocks[static_cast<int>(s)][3] == meet, "stream did not reach 700x200x5");
    v.require(plan.fused == meet, "fused shape");
    v.require(plan.bev_width == 700 && plan.bev_height == 200 && plan.bev_channels == 640, "canonical BEV shape");

    const Volume reduced = Volume::reduced();
    const ShapePlan small = plan_shapes(reduced);
    const auto frame = comms::gen_scene(5, 3, 6000);
    std::vector<CollectiveInput> inputs;
    comms::ChannelConfig cfg;
    cfg.volume = reduced;
    std::size_t i = 0;
    for (const auto& veh : frame.vehicles) {
        if (veh.id == frame.ego_id) continue;
        const auto msg = comms::build_message(veh, kAllLevels[i++ % 3], 0, cfg);
        inputs.push_back(comms::receive(codec::encode(msg), frame.ego().pose, reduced));
    }
    const ForwardResult r = forward(frame.ego().cloud, inputs, init_weights(42), {reduced, FeatureKind::Center});
    v.require(r.fused.shape() == small.fused, "reduced fused shape");
    v.require(r.fused.channels() == 64, "merged stream channels " + std::to_string(r.fused.channels()));
    const auto out = std::find_if(r.stages.begin(), r.stages.end(), [](const StageStats& s) { return s.name == "bev"; });
    v.require(out != r.stages.end() && out->channels == 128 && out->shape == small.fused, "fused output is not 128 channels");
    v.require(r.bev.width == small.bev_width && r.bev.height == small.bev_height && r.bev.channels == 640,
              "reduced BEV shape");
    if (v.ok)
        v.detail = "canonical streams meet at 700x200x5x64, BEV 700x200x640; reduced run fused " +
                   std::to_string(small.fused[0]) + "x" + std::to_string(small.fused[1]) + "x" +
                   std::to_string(small.fused[2]) + "x128, BEV " + std::to_string(r.bev.width) + "x" +
                   std::to_string(r.bev.height) + "x640";
    return v;
}

Verdict scatter_algebra() {
    Verdict v;
    Rng rng(6);
    const Extent3 shape{6, 5, 4};
    auto tensor = [&](std::size_t ch) { return golden::random_tensor(rng, shape, ch, rng.uniform(0.0, 0.6)); };
    int trials = 0;
    for (; trials < 500 && v.ok; ++trials) {
        const SparseTensor a = tensor(3), b = tensor(3), c = tensor(3);
        const std::vector<SparseTensor> abc{a, b, c}, cab{c, a, b}, ab{a, b}, bc{b, c}, aa{a, a};
        const SparseTensor lhs = scatter(std::vector<SparseTensor>{scatter(ab, Reduce::Max), c}, Reduce::Max);
        const SparseTensor rhs = scatter(std::vector<SparseTensor>{a, scatter(bc, Reduce::Max)}, Reduce::Max);
        v.require(scatter(abc, Reduce::Max) == scatter(cab, Reduce::Max), "max not commutative");
        v.require(lhs == rhs, "max not associative");
        v.require(scatter(aa, Reduce::Max) == a, "max not idempotent");
        for (Reduce r : {Reduce::Max, Reduce::Min, Reduce::Sum, Reduce::Mean, Reduce::Mul}) {
            const SparseTensor out = scatter(abc, r);
            const auto expect = oracle::scatter(abc, r);
            v.require(out.size() == expect.size(), std::string("size mismatch for ") + std::string(to_string(r)));
            if (!v.ok) break;
            std::size_t i = 0;
            for (const auto& [coord, row] : expect) {
                v.require(out.coords()[i] == coord, "coordinate mismatch");
                for (std::size_t j = 0; j < row.size(); ++j) {
                    const double got = out.features().at(i, j);
                    const bool exact = r == Reduce::Max || r == Reduce::Min;
                    v.require(exact ? got == static_cast<float>(row[j]) : std::abs(got - row[j]) <= 1e-5,
                              std::string("value mismatch for ") + std::string(to_string(r)));
                }
                ++i;
            }
        }
    }
    if (v.ok) v.detail = std::to_string(trials) + " multisets, max laws exact, 5 reducers match map-fold";
    return v;
}

Verdict codec_round_trip() {
    Verdict v;
    Rng rng(7);
    int n = 0;
    for (; n < 10000 && v.ok; ++n) {
        const codec::Mode mode = n % 2 ? codec::Mode::CoordsPlusMeanFeatures : codec::Mode::CoordsOnly;
        const codec::Sublayout sub = (n / 2) % 2 ? codec::Sublayout::Packed : codec::Sublayout::Compat;
        const auto m = golden::random_message(rng, mode);
        const auto bytes = codec::encode(m, mode, sub);
        const auto back = codec::decode(bytes);
        v.require(back == m, "decode(encode(m)) != m at message " + std::to_string(n));
        v.require(codec::encode(back, mode, sub) == bytes, "re-encode differs at message " + std::to_string(n));
    }
    std::size_t goldens = 0;
    for (const auto& a : golden::build_artifacts()) {
        const auto path = fs::path(VOXFUSE_GOLDEN_DIR) / a.name;
        v.require(fs::exists(path), "missing golden " + a.name);
        if (!v.ok) break;
        v.require(detail::read_file(path.string()) == a.bytes, "golden drift in " + a.name);
        ++goldens;
    }
    if (v.ok) v.detail = std::to_string(n) + " messages bitwise, " + std::to_string(goldens) + " golden files stable";
    return v;
}

struct Shell {
    int code = -1;
    std::string out;
};

Shell shell(const std::string& cmd) {
    Shell s;
    FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!p) return s;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) s.out.append(buf, n);
    const int status = pclose(p);
    s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return s;
}

std::string value_of(const std::string& text, const std::string& key) {
    const auto at = text.find(key + "=");
    if (at == std::string::npos) return {};
    const auto end = text.find('\n', at);
    return text.substr(at + key.size() + 1, end - at - key.size() - 1);
}

Verdict forward_determinism() {
    Verdict v;
    const auto dir = fs::temp_directory_path() / "voxfuse_acceptance";
    fs::create_directories(dir);
    const std::string cli = VOXFUSE_CLI;
    const std::string ego = (dir / "ego.pcf").string();
    v.require(shell(cli + " gen-cloud --seed 21 --points 4000 -o " + ego).code == 0, "gen-cloud failed");
    v.require(shell(cli + " gen-cloud --seed 22 --points 4000 -o " + (dir / "cav.pcf").string()).code == 0,
              "gen-cloud failed");
    std::string cavs;
    for (const char* level : {"high", "medium", "low"}) {
        const std::string out = (dir / (std::string(level) + ".svg")).string();
        v.require(shell(cli + " voxelize " + (dir / "cav.pcf").string() + " --volume reduced --sender-id 9 --level " +
                        level + " -o " + out)
                          .code == 0,
                  "voxelize failed");
        cavs += " --cav " + out;
    }
    const unsigned max_threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::string> hashes;
    for (unsigned threads : {1u, max_threads, 4u, max_threads}) {
        const Shell r = shell(cli + " forward --volume reduced --seed 42 --ego " + ego + cavs + " --threads " +
                              std::to_string(threads) + " -o " + (dir / "bev.bin").string());
        v.require(r.code == 0, "forward exited " + std::to_string(r.code));
        const auto bytes = v.ok ? detail::read_file((dir / "bev.bin").string()) : std::vector<std::uint8_t>{};
        v.require(sha256_hex(bytes) == value_of(r.out, "bev_sha256"), "printed hash differs from file");
        hashes.push_back(value_of(r.out, "bev_sha256"));
    }
    for (const auto& h : hashes) v.require(h == hashes[0] && h.size() == 64, "BEV hash changed between runs");
    fs::remove_all(dir);
    if (v.ok)
        v.detail = "4 runs at threads {1, " + std::to_string(max_threads) + " (max), 4}, sha256 " + hashes[0].substr(0, 16) + "...";
    return v;
}

Verdict fusion_semantics() {
    Verdict v;
    const Volume reduced = Volume::reduced();
    const ForwardOptions opts{reduced, FeatureKind::Center};
    const BackboneWeights w = init_weights(42);
    const auto frame = comms::gen_scene(9, 4, 6000);
    const PointCloud& ego = frame.ego().cloud;

    std::vector<CollectiveInput> same;
    for (Level l : kAllLevels) same.push_back({l, voxelize(ego, reduced.spec(l))});
    const auto alone = encode_bev(forward(ego, {}, w, opts).bev);
    v.require(encode_bev(forward(ego, same, w, opts).bev) == alone, "collective == ego changed the BEV");

    comms::ChannelConfig cfg;
    cfg.volume = reduced;
    std::vector<CollectiveInput> cavs;
    for (const auto& veh : frame.vehicles) {
        if (veh.id == frame.ego_id) continue;
        for (Level l : {Level::High, Level::Low})
            cavs.push_back(comms::receive(codec::encode(comms::build_message(veh, l, 0, cfg)), frame.ego().pose, reduced));
    }
    const auto base = encode_bev(forward(ego, cavs, w, opts).bev);
    std::reverse(cavs.begin(), cavs.end());
    v.require(encode_bev(forward(ego, cavs, w, opts).bev) == base, "reversed CAV order changed the BEV");
    std::rotate(cavs.begin(), cavs.begin() + 1, cavs.end());
    v.require(encode_bev(forward(ego, cavs, w, opts).bev) == base, "rotated CAV order changed the BEV");
    if (v.ok) v.detail = "ego-as-collective bitwise equal; " + std::to_string(cavs.size()) + " CAV inputs, 3 orders equal";
    return v;
}

Verdict budget_strategy() {
    Verdict v;
    Rng rng(10);
    int trials = 0;
    std::size_t checked = 0;
    for (; trials < 2000 && v.ok; ++trials) {
        const std::size_t n = 1 + rng.below(4);
        std::vector<comms::BudgetCandidate> cands;
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t low = 1000 + rng.below(60000);
            const std::uint64_t med = low + rng.below(80000);
            const std::uint64_t high = med + rng.below(200000);
            cands.push_back({static_cast<std::uint32_t>(i + 1), rng.uniform(0.0, 70.0), {high, med, low}});
        }
        const double capacity = rng.uniform(0.1, 60.0);
        const comms::Assignment g = comms::assign_budget(cands, capacity, 10.0);
        v.require(oracle::assignment_mbps(g, cands, 10.0) <= capacity, "greedy exceeds capacity");
        auto rank = [&](const comms::Assignment& a, std::size_t i) {
            const auto it = a.find(cands[i].id);
            return it == a.end() ? -1 : 2 - static_cast<int>(it->second);
        };
        for (const auto& choice : oracle::enumerate(n, 3)) {
            comms::Assignment alt;
            for (std::size_t i = 0; i < n; ++i) alt[cands[i].id] = kAllLevels[static_cast<std::size_t>(choice[i])];
            ++checked;
            if (oracle::assignment_mbps(alt, cands, 10.0) > capacity) continue;
            bool geq = true, gt = false;
            for (std::size_t i = 0; i < n; ++i) {
                geq = geq && rank(alt, i) >= rank(g, i);
                gt = gt || rank(alt, i) > rank(g, i);
            }
            v.require(!(geq && gt), "greedy dominated on trial " + std::to_string(trials));
        }
    }
    if (v.ok) v.detail = std::to_string(trials) + " trials, " + std::to_string(checked) + " enumerated assignments";
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"bandwidth arithmetic", bandwidth_arithmetic},
        {"dynamic mean bandwidth", dynamic_mean},
        {"point-size consistency", point_count},
        {"sparse-dense conv equivalence", conv_equivalence},
        {"shape pipeline", shape_pipeline},
        {"scatter algebra", scatter_algebra},
        {"codec round-trip", codec_round_trip},
        {"end-to-end determinism", forward_determinism},
        {"fusion semantics", fusion_semantics},
        {"budget strategy", budget_strategy},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.ok;
        std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << v.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
