// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include <gtest/gtest.h>

#include <numbers>

#include "voxfuse/errors.hpp"
#include "voxfuse/geometry.hpp"
#include "voxfuse/rng.hpp"

namespace voxfuse {
namespace {

void expect_near(const Vec3& a, const Vec3& b, double tol) {
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(a[d], b[d], tol);
}

Pose random_pose(Rng& rng) {
    return Pose::from_yaw(rng.uniform(-std::numbers::pi, std::numbers::pi),
                          {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-2, 2)});
}

TEST(Pose, YawRotatesCounterClockwise) {
    const Pose p = Pose::from_yaw(std::numbers::pi / 2, {1.0, 0.0, 0.0});
    expect_near(p.apply({1.0, 0.0, 0.0}), {1.0, 1.0, 0.0}, 1e-12);
}

TEST(Pose, ComposeAppliesRightOperandFirst) {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Pose a = random_pose(rng), b = random_pose(rng);
        const Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
        expect_near(compose(a, b).apply(p), a.apply(b.apply(p)), 1e-9);
    }
}

TEST(Pose, InverseUndoes) {
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const Pose a = random_pose(rng);
        const Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
        expect_near(inverse(a).apply(a.apply(p)), p, 1e-9);
    }
}

TEST(Pose, RelativePoseMapsSenderToReceiver) {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Pose ego = random_pose(rng), cav = random_pose(rng);
        const Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
        // A point seen by the CAV lands at the same world position once moved into the ego frame.
        expect_near(ego.apply(relative_pose(ego, cav).apply(p)), cav.apply(p), 1e-9);
    }
}

TEST(Pose, CheckedRejectsNonOrthonormal) {
    EXPECT_NO_THROW(Pose::checked(identity_matrix(), {0, 0, 0}));
    EXPECT_THROW(Pose::checked({1, 0, 0, 0, 1, 0, 0, 0, 1.01}, {0, 0, 0}), InvalidArgument);
    // A reflection is orthonormal but not a rotation.
    EXPECT_THROW(Pose::checked({1, 0, 0, 0, 1, 0, 0, 0, -1}, {0, 0, 0}), InvalidArgument);
}

TEST(Pose, OrthonormalityErrorOfRotationsIsTiny) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) EXPECT_LT(random_pose(rng).orthonormality_error(), 1e-12);
}

}  // namespace
}  // namespace voxfuse
