// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "voxfuse/conv.hpp"
#include "voxfuse/dense_reference.hpp"
#include "voxfuse/errors.hpp"
#include "voxfuse/golden.hpp"
#include "voxfuse/parallel.hpp"

namespace voxfuse {
namespace {

ConvParams random_params(Rng& rng, int cin, int cout, ConvMode mode, int stride) {
    ConvParams p(cin, cout, mode, stride);
    for (float& w : p.weights) w = static_cast<float>(rng.uniform(-1.0, 1.0));
    return p;
}

Extent3 random_shape(Rng& rng) {
    return {static_cast<std::int32_t>(1 + rng.below(12)), static_cast<std::int32_t>(1 + rng.below(12)),
            static_cast<std::int32_t>(1 + rng.below(6))};
}

TEST(ConvShape, OutputExtentFormula) {
    EXPECT_EQ(conv_output_extent(5600, 2), 2800);
    EXPECT_EQ(conv_output_extent(40, 2), 20);
    EXPECT_EQ(conv_output_extent(5, 2), 3);
    EXPECT_EQ(conv_output_extent(1, 2), 1);
    EXPECT_EQ(conv_output_extent(7, 1), 7);
    EXPECT_EQ(conv_output_extent(175, 2), 88);
    EXPECT_EQ(conv_output_shape({12, 7, 5}, ConvMode::Submanifold, 1), (Extent3{12, 7, 5}));
    EXPECT_EQ(conv_output_shape({12, 7, 5}, ConvMode::SparseStrided, 2), (Extent3{6, 4, 3}));
}

TEST(ConvShape, TapLayout) {
    EXPECT_EQ(tap_index(1, 1, 1), kCenterTap);
    for (int t = 0; t < kKernelVolume; ++t) {
        const Coord o = tap_offset(t);
        EXPECT_EQ(tap_index(o[0], o[1], o[2]), t);
    }
}

TEST(ConvParams, Validation) {
    EXPECT_THROW(ConvParams(3, 4, ConvMode::Submanifold, 2).validate(), InvalidArgument);
    EXPECT_THROW(ConvParams(3, 4, ConvMode::SparseStrided, 3).validate(), InvalidArgument);
    ConvParams p(3, 4, ConvMode::SparseStrided, 2);
    p.weights[5] = NAN;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.weights.pop_back();
    EXPECT_THROW(p.validate(), InvalidArgument);
}

// Property: sparse results equal the zero-padded dense convolution at every output site, and every
// site outside the sparse output set is zero in the dense result.
TEST(SparseConv, MatchesDenseOracles) {
    Rng rng(2024);
    int instances = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Extent3 shape = random_shape(rng);
        const int cin = 1 + static_cast<int>(rng.below(8));
        const int cout = 1 + static_cast<int>(rng.below(8));
        const SparseTensor t = golden::random_tensor(rng, shape, static_cast<std::size_t>(cin), rng.uniform(0.02, 0.5));
        for (auto [mode, stride] : {std::pair{ConvMode::Submanifold, 1}, std::pair{ConvMode::SparseStrided, 1},
                                    std::pair{ConvMode::SparseStrided, 2}}) {
            const ConvParams p = random_params(rng, cin, cout, mode, stride);
            const SparseTensor out = sparse_conv(t, p);
            const DenseVolume dense = dense_oracle(t, p);
            ASSERT_EQ(out.shape(), dense.shape);
            ASSERT_EQ(out.channels(), static_cast<std::size_t>(cout));

            if (mode == ConvMode::Submanifold) {
                ASSERT_EQ(out.coords(), t.coords());
            } else {
                ASSERT_EQ(oracle::CoordSet(out.coords().begin(), out.coords().end()), oracle::reachable_outputs(t, stride));
            }
            for (std::size_t i = 0; i < out.size(); ++i) {
                const auto expect = oracle::conv_at(t, p, out.coords()[i]);
                for (int co = 0; co < cout; ++co) {
                    ASSERT_NEAR(out.features().at(i, co), expect[co], 1e-5);
                    ASSERT_NEAR(dense.at(out.coords()[i], co), expect[co], 1e-9);
                }
            }
            if (mode == ConvMode::SparseStrided) {
                const oracle::CoordSet active(out.coords().begin(), out.coords().end());
                for (std::int32_t x = 0; x < dense.shape[0]; ++x)
                    for (std::int32_t y = 0; y < dense.shape[1]; ++y)
                        for (std::int32_t z = 0; z < dense.shape[2]; ++z) {
                            if (active.count({x, y, z})) continue;
                            for (int co = 0; co < cout; ++co) ASSERT_EQ(dense.at({x, y, z}, co), 0.0);
                        }
            }
            ++instances;
        }
    }
    EXPECT_EQ(instances, 900);
}

TEST(Rulebook, RuleCountEqualsReachablePairs) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const SparseTensor t = golden::random_tensor(rng, random_shape(rng), 1, rng.uniform(0.02, 0.6));
        for (auto [mode, stride] : {std::pair{ConvMode::Submanifold, 1}, std::pair{ConvMode::SparseStrided, 1},
                                    std::pair{ConvMode::SparseStrided, 2}}) {
            const Rulebook rb = build_rulebook(t.coords(), t.shape(), mode, stride);
            ASSERT_EQ(rb.rule_count(), dense_reachable_pairs(t, mode, stride));
        }
    }
}

TEST(Rulebook, RulesAreConsistentAndOrdered) {
    Rng rng(8);
    const SparseTensor t = golden::random_tensor(rng, {10, 9, 6}, 1, 0.2);
    for (int stride : {1, 2}) {
        const Rulebook rb = build_rulebook(t.coords(), t.shape(), ConvMode::SparseStrided, stride);
        EXPECT_TRUE(std::is_sorted(rb.out_coords.begin(), rb.out_coords.end()));
        for (int k = 0; k < kKernelVolume; ++k) {
            const Coord off = tap_offset(k);
            std::int32_t last = -1;
            for (auto [in, out] : rb.pairs[k]) {
                EXPECT_GT(out, last);
                last = out;
                for (int d = 0; d < 3; ++d)
                    EXPECT_EQ(t.coords()[in][d], rb.out_coords[out][d] * stride + off[d] - kPadding);
            }
        }
        EXPECT_EQ(rb.rules().size(), rb.rule_count());
    }
}

TEST(Rulebook, SubmanifoldCenterTapIsIdentity) {
    Rng rng(9);
    const SparseTensor t = golden::random_tensor(rng, {8, 8, 4}, 1, 0.3);
    const Rulebook rb = build_rulebook(t.coords(), t.shape(), ConvMode::Submanifold, 1);
    ASSERT_EQ(rb.pairs[kCenterTap].size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        EXPECT_EQ(rb.pairs[kCenterTap][i], (std::pair<std::int32_t, std::int32_t>(i, i)));
}

TEST(SparseConv, IdentityKernelCopiesFeatures) {
    Rng rng(10);
    const SparseTensor t = golden::random_tensor(rng, {8, 8, 4}, 5, 0.3);
    EXPECT_EQ(sparse_conv(t, identity_conv(5)), t);
}

TEST(SparseConv, EmptyInput) {
    const SparseTensor t({4, 4, 4}, 3);
    const SparseTensor out = sparse_conv(t, ConvParams(3, 2, ConvMode::SparseStrided, 2));
    EXPECT_TRUE(out.empty());
    EXPECT_EQ(out.shape(), (Extent3{2, 2, 2}));
    EXPECT_EQ(out.channels(), 2u);
}

TEST(SparseConv, ChannelMismatchRejected) {
    const SparseTensor t({4, 4, 4}, 3);
    EXPECT_THROW(sparse_conv(t, ConvParams(4, 2, ConvMode::Submanifold)), ShapeError);
}

TEST(SparseConv, BitwiseIndependentOfThreadCount) {
    Rng rng(11);
    const SparseTensor t = golden::random_tensor(rng, {40, 40, 20}, 16, 0.1);
    const ConvParams p = random_params(rng, 16, 32, ConvMode::SparseStrided, 1);
    const int saved = max_threads();
    set_num_threads(1);
    const SparseTensor one = sparse_conv(t, p);
    set_num_threads(4);
    const SparseTensor four = sparse_conv(t, p);
    set_num_threads(saved);
    EXPECT_EQ(one, four);
}

TEST(NormRelu, MatchesScalarReference) {
    Rng rng(12);
    const SparseTensor t = golden::random_tensor(rng, {6, 6, 6}, 4, 0.5);
    NormParams n = NormParams::identity(4);
    for (std::size_t c = 0; c < 4; ++c) {
        n.gamma[c] = static_cast<float>(rng.uniform(0.5, 2.0));
        n.beta[c] = static_cast<float>(rng.uniform(-0.5, 0.5));
        n.mean[c] = static_cast<float>(rng.uniform(-0.5, 0.5));
        n.var[c] = static_cast<float>(rng.uniform(0.1, 2.0));
    }
    const SparseTensor out = norm_relu(t, n);
    ASSERT_EQ(out.coords(), t.coords());
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t c = 0; c < 4; ++c) {
            const double expect = oracle::norm_relu(t.features().at(i, c), n.gamma[c], n.beta[c], n.mean[c], n.var[c], n.eps);
            EXPECT_NEAR(out.features().at(i, c), expect, 1e-6);
            EXPECT_FALSE(std::signbit(out.features().at(i, c)));
        }
}

TEST(NormRelu, RejectsBadParameters) {
    const SparseTensor t({2, 2, 2}, 2);
    EXPECT_THROW(norm_relu(t, NormParams::identity(3)), ShapeError);
    NormParams n = NormParams::identity(2);
    n.var[0] = -1.0f;
    EXPECT_THROW(norm_relu(t, n), InvalidArgument);
}

TEST(SparseTensor, ConstructorValidates) {
    FeatureMatrix f(2, 1);
    EXPECT_THROW(SparseTensor({4, 4, 4}, {{1, 0, 0}, {0, 0, 0}}, f), ShapeError);
    EXPECT_THROW(SparseTensor({4, 4, 4}, {{0, 0, 0}, {4, 0, 0}}, f), ShapeError);
    EXPECT_THROW(SparseTensor({4, 4, 4}, {{0, 0, 0}}, f), ShapeError);
}

}  // namespace
}  // namespace voxfuse
