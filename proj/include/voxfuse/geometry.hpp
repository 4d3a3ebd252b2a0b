// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cmath>

namespace voxfuse {

using Vec3 = std::array<double, 3>;
/// Row-major 3x3 matrix.
using Mat3 = std::array<double, 9>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Mat3 identity_matrix();
Mat3 multiply(const Mat3& a, const Mat3& b);
Mat3 transpose(const Mat3& m);
Vec3 multiply(const Mat3& m, const Vec3& v);
double determinant(const Mat3& m);

/// Rigid transform x -> R x + t. Maps points of a local frame into a parent frame.
struct Pose {
    Mat3 rotation = identity_matrix();
    Vec3 translation{0.0, 0.0, 0.0};

    static Pose identity() { return {}; }
    /// Rotation about +z by `yaw` radians followed by a translation.
    static Pose from_yaw(double yaw, const Vec3& translation);
    /// Throws InvalidArgument unless rotation is orthonormal with det +1 within 1e-9.
    static Pose checked(const Mat3& rotation, const Vec3& translation);

    Vec3 apply(const Vec3& p) const { return multiply(rotation, p) + translation; }

    /// Largest deviation of R^T R from I, and of det(R) from 1.
    double orthonormality_error() const;

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// compose(a, b) maps x to a(b(x)).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
/// Transform taking points of `from`'s frame into `to`'s frame, both given in world coordinates.
Pose relative_pose(const Pose& to, const Pose& from);

}  // namespace voxfuse
