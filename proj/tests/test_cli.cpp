// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "voxfuse/detail/byte_io.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("voxfuse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Outcome run(const std::string& args) const {
        const std::string err_path = path("stderr.txt");
        const std::string cmd = std::string(VOXFUSE_CLI) + " " + args + " 2>" + err_path;
        Outcome r;
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return r;
        char buf[4096];
        std::size_t n = 0;
        while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
        const int status = pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream e(err_path);
        r.err.assign(std::istreambuf_iterator<char>(e), {});
        return r;
    }

    fs::path dir_;
};

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (auto eq = line.find('='); eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
    return out;
}

std::vector<std::vector<std::string>> tsv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::istringstream l(line);
        std::string cell;
        while (std::getline(l, cell, '\t')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const std::string& p) {
    const auto b = voxfuse::detail::read_file(p);
    return {b.begin(), b.end()};
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("no-such-command").code, 1);
    EXPECT_EQ(run("bandwidth").code, 1);
    EXPECT_EQ(run("simulate --synthetic 1 --frames 0").code, 1);
    EXPECT_EQ(run("simulate --synthetic 1 --strategy greedy").code, 1);

    const Outcome missing = run("voxelize " + path("missing.pcf") + " -o " + path("x.svg"));
    EXPECT_EQ(missing.code, 2);
    EXPECT_FALSE(missing.err.empty());

    std::ofstream(path("junk.svg")) << "not a message";
    EXPECT_EQ(run("inspect " + path("junk.svg")).code, 2);
}

TEST_F(Cli, BandwidthTable) {
    const Outcome r = run("bandwidth 914900 180000 111000 54500 0");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = tsv(r.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"input", "bytes", "mbps", "display"}));
    const std::vector<std::string> shown{"73.1", "14.4", "8.8", "4.3", "0.0"};
    for (std::size_t i = 0; i < shown.size(); ++i) EXPECT_EQ(rows[i + 1][3], shown[i]);
    EXPECT_EQ(rows[6][0], "mean");

    const Outcome at20 = run("bandwidth 54500 --frequency 20");
    EXPECT_EQ(tsv(at20.out)[1][3], "8.7");
}

TEST_F(Cli, BandwidthOfMessageFile) {
    ASSERT_EQ(run("gen-cloud --seed 7 -o " + path("c.pcf")).code, 0);
    ASSERT_EQ(run("voxelize " + path("c.pcf") + " -o " + path("c.svg") + " --level low").code, 0);
    const Outcome r = run("bandwidth " + path("c.svg"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(tsv(r.out)[1][1], std::to_string(fs::file_size(path("c.svg"))));
}

TEST_F(Cli, EmptyCloudGivesEmptyMessage) {
    ASSERT_EQ(run("gen-cloud --seed 7 --points 0 -o " + path("e.pcf")).code, 0);
    const Outcome r = run("voxelize " + path("e.pcf") + " -o " + path("e.svg"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto kv = key_values(r.out);
    EXPECT_EQ(kv.at("voxels"), "0");
    EXPECT_EQ(kv.at("message_bytes"), "107");
    EXPECT_EQ(fs::file_size(path("e.svg")), 107u);
}

TEST_F(Cli, VoxelizeMatchesGolden) {
    ASSERT_EQ(run("gen-cloud --seed 7 -o " + path("c.pcf")).code, 0);
    const Outcome r = run("voxelize " + path("c.pcf") + " -o " + path("c.svg") + " --level low");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("c.svg")), slurp(std::string(VOXFUSE_GOLDEN_DIR) + "/voxelize_seed7_low.svg"));
    const Outcome info = run("inspect " + path("c.svg"));
    EXPECT_EQ(info.code, 0);
    EXPECT_NE(info.out.find("level=low"), std::string::npos) << info.out;
}

TEST_F(Cli, SimulateMatchesGolden) {
    const Outcome r = run("simulate --synthetic 1 --seed 1 --points 8000 --report " + path("r.txt"));
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string golden = slurp(std::string(VOXFUSE_GOLDEN_DIR) + "/simulate_seed1_uniform.txt");
    EXPECT_EQ(slurp(path("r.txt")), golden);
}

TEST_F(Cli, ScenarioFileRoundTrip) {
    ASSERT_EQ(run("gen-scenario --seed 3 --frames 4 --points 2000 -o " + path("s.txt")).code, 0);
    const Outcome a = run("simulate --scenario " + path("s.txt") + " --seed 2");
    const Outcome b = run("simulate --synthetic 3 --frames 4 --points 2000 --seed 2");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(key_values(a.out).at("frames"), "4");
    EXPECT_EQ(key_values(a.out).at("messages"), key_values(b.out).at("messages"));
}

TEST_F(Cli, BudgetStaysUnderCapacity) {
    const Outcome r = run("simulate --synthetic 2 --frames 200 --pinned-sizes 180000,111000,54500 --strategy budget "
                      "--capacity 5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LE(std::stod(key_values(r.out).at("max_frame_mbps")), 5.0);
    EXPECT_EQ(run("simulate --synthetic 2 --frames 5 --strategy budget").code, 1);
}

TEST_F(Cli, ForwardHashIsStable) {
    ASSERT_EQ(run("gen-cloud --seed 11 --points 3000 -o " + path("ego.pcf")).code, 0);
    ASSERT_EQ(run("gen-cloud --seed 12 --points 3000 -o " + path("cav.pcf")).code, 0);
    ASSERT_EQ(run("voxelize " + path("cav.pcf") + " -o " + path("h.svg") + " --level high --volume reduced --sender-id 2").code, 0);
    ASSERT_EQ(run("voxelize " + path("cav.pcf") + " -o " + path("l.svg") + " --level low --volume reduced --sender-id 3").code, 0);
    const std::string base = "forward --volume reduced --ego " + path("ego.pcf");
    const Outcome one = run(base + " --cav " + path("h.svg") + " --cav " + path("l.svg") + " --threads 1 -o " + path("b.bev"));
    ASSERT_EQ(one.code, 0) << one.err;
    const Outcome two = run(base + " --cav " + path("l.svg") + " --cav " + path("h.svg") + " --threads 3");
    const auto k1 = key_values(one.out), k2 = key_values(two.out);
    EXPECT_EQ(k1.at("bev_shape"), "48x16x640");
    EXPECT_EQ(k1.at("bev_sha256").size(), 64u);
    EXPECT_EQ(k1.at("bev_sha256"), k2.at("bev_sha256"));
    EXPECT_TRUE(fs::exists(path("b.bev")));
    EXPECT_EQ(run(base + " --ego-pose \"1 0 0\"").code, 1);
}

TEST_F(Cli, BenchCountsMatchOracle) {
    const Outcome a = run("bench --sizes 8,12 --channels 4 --density 0.1 --seed 5");
    const Outcome b = run("bench --sizes 8,12 --channels 4 --density 0.1 --seed 5 --threads 1");
    ASSERT_EQ(a.code, 0) << a.err;
    const auto ra = tsv(a.out), rb = tsv(b.out);
    ASSERT_EQ(ra.size(), 7u);
    EXPECT_EQ(ra[0][3], "rules");
    EXPECT_EQ(ra[0][4], "oracle_pairs");
    for (std::size_t i = 1; i < ra.size(); ++i) {
        EXPECT_EQ(ra[i][3], ra[i][4]);
        for (int c : {0, 1, 2, 3, 5}) EXPECT_EQ(ra[i][c], rb[i][c]);
        EXPECT_GT(std::stod(ra[i][8]), 0.0);
        EXPECT_GT(std::stod(ra[i][9]), 0.0);
    }
}

TEST_F(Cli, ConfigFileAndOverrides) {
    std::ofstream(path("v.conf")) << "volume = reduced\nfrequency = 20\n";
    const Outcome r = run("bandwidth 54500 --config " + path("v.conf"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(tsv(r.out)[1][3], "8.7");
    std::ofstream(path("bad.conf")) << "colour = red\n";
    EXPECT_EQ(run("bandwidth 1 --config " + path("bad.conf")).code, 1);
}

TEST_F(Cli, GoldenCheckPasses) {
    const Outcome r = run(std::string("golden --dir ") + VOXFUSE_GOLDEN_DIR);
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

}  // namespace
