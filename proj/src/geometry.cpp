// Copyright 2026 The voxfuse Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0

#include "voxfuse/geometry.hpp"

#include <algorithm>

#include "voxfuse/errors.hpp"

namespace voxfuse {

Mat3 identity_matrix() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 multiply(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i * 3 + j] = a[i * 3 + 0] * b[0 * 3 + j] + a[i * 3 + 1] * b[1 * 3 + j] + a[i * 3 + 2] * b[2 * 3 + j];
    return r;
}

Mat3 transpose(const Mat3& m) { return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}; }

Vec3 multiply(const Mat3& m, const Vec3& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

double determinant(const Mat3& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Pose Pose::from_yaw(double yaw, const Vec3& translation) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return Pose{{c, -s, 0, s, c, 0, 0, 0, 1}, translation};
}

Pose Pose::checked(const Mat3& rotation, const Vec3& translation) {
    Pose p{rotation, translation};
    if (!std::all_of(rotation.begin(), rotation.end(), [](double v) { return std::isfinite(v); }) ||
        !std::all_of(translation.begin(), translation.end(), [](double v) { return std::isfinite(v); }))
        throw InvalidArgument("pose contains non-finite values");
    if (p.orthonormality_error() > 1e-9) throw InvalidArgument("pose rotation is not a proper rotation");
    return p;
}

double Pose::orthonormality_error() const {
    const Mat3 rtr = multiply(transpose(rotation), rotation);
    const Mat3 eye = identity_matrix();
    double err = std::abs(determinant(rotation) - 1.0);
    for (int i = 0; i < 9; ++i) err = std::max(err, std::abs(rtr[i] - eye[i]));
    return err;
}

Pose compose(const Pose& a, const Pose& b) {
    return Pose{multiply(a.rotation, b.rotation), multiply(a.rotation, b.translation) + a.translation};
}

Pose inverse(const Pose& p) {
    const Mat3 rt = transpose(p.rotation);
    const Vec3 t = multiply(rt, p.translation);
    return Pose{rt, {-t[0], -t[1], -t[2]}};
}

Pose relative_pose(const Pose& to, const Pose& from) { return compose(inverse(to), from); }

}  // namespace voxfuse
