#pragma once

#include <array>
#include <cmath>
#include <string>

#include "graspkit/core/error.hpp"

namespace graspkit::geom {

inline constexpr double kPi = 3.14159265358979323846;

// Fold an in-plane angle into the canonical range (-pi/2, pi/2]. An oriented
// grasp rectangle is symmetric under a half turn, so angles are identified
// modulo pi.
inline double canonical_theta(double theta) {
    if (!std::isfinite(theta)) {
        throw UsageError("canonical_theta: angle must be finite");
    }
    double r = std::fmod(theta, kPi);
    if (r <= -kPi / 2.0) {
        r += kPi;
    } else if (r > kPi / 2.0) {
        r -= kPi;
    }
    return r;
}

// 3x3 rotation matrix, element m[row][col].
struct RotationMatrix {
    std::array<std::array<double, 3>, 3> m{};

    double orthonormality_defect() const {
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double dotij = 0.0;
                for (int k = 0; k < 3; ++k) dotij += m[k][i] * m[k][j];
                worst = std::max(worst, std::abs(dotij - (i == j ? 1.0 : 0.0)));
            }
        }
        return worst;
    }

    double determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
};

inline RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
    RotationMatrix r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
            r.m[i][j] = s;
        }
    }
    return r;
}

// In-plane grasp rotation about the optical axis: columns are
// x = (cos t, sin t, 0), y = z x x = (-sin t, cos t, 0), z = (0, 0, 1).
inline RotationMatrix rotation_from_theta(double theta) {
    if (!std::isfinite(theta)) {
        throw UsageError("rotation_from_theta: angle must be finite");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    RotationMatrix r;
    r.m = {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
    return r;
}

// Unit quaternion, Hamilton convention, component order (x, y, z, w),
// canonicalized so w >= 0.
struct Quaternion {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }

    Quaternion canonical() const {
        if (w < 0.0) return {-x, -y, -z, -w};
        return *this;
    }

    Quaternion normalized() const {
        const double n = norm();
        if (!(n > 0.0)) {
            throw GeometryError("Quaternion: cannot normalize zero quaternion");
        }
        return Quaternion{x / n, y / n, z / n, w / n}.canonical();
    }
};

inline double dot(const Quaternion& a, const Quaternion& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w;
}

// Geodesic distance on SO(3) between two unit quaternions, in radians.
inline double quaternion_angle(const Quaternion& a, const Quaternion& b) {
    const double d = std::min(1.0, std::abs(dot(a, b)));
    return 2.0 * std::acos(d);
}

// Shepperd-style conversion: the branch is chosen by the largest of the
// trace and the diagonal entries, which keeps the divisor away from zero.
inline Quaternion matrix_to_quaternion(const RotationMatrix& r) {
    if (r.orthonormality_defect() > 1e-9 || std::abs(r.determinant() - 1.0) > 1e-9) {
        throw GeometryError("matrix_to_quaternion: matrix is not a proper rotation");
    }
    const auto& m = r.m;
    const double tr = m[0][0] + m[1][1] + m[2][2];
    Quaternion q;
    if (tr > m[0][0] && tr > m[1][1] && tr > m[2][2]) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        q.w = 0.25 * s;
        q.x = (m[2][1] - m[1][2]) / s;
        q.y = (m[0][2] - m[2][0]) / s;
        q.z = (m[1][0] - m[0][1]) / s;
    } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
        const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
        q.w = (m[2][1] - m[1][2]) / s;
        q.x = 0.25 * s;
        q.y = (m[0][1] + m[1][0]) / s;
        q.z = (m[0][2] + m[2][0]) / s;
    } else if (m[1][1] > m[2][2]) {
        const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
        q.w = (m[0][2] - m[2][0]) / s;
        q.x = (m[0][1] + m[1][0]) / s;
        q.y = 0.25 * s;
        q.z = (m[1][2] + m[2][1]) / s;
    } else {
        const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
        q.w = (m[1][0] - m[0][1]) / s;
        q.x = (m[0][2] + m[2][0]) / s;
        q.y = (m[1][2] + m[2][1]) / s;
        q.z = 0.25 * s;
    }
    return q.normalized();
}

inline RotationMatrix quaternion_to_matrix(const Quaternion& q) {
    if (std::abs(q.norm() - 1.0) > 1e-9) {
        throw GeometryError("quaternion_to_matrix: quaternion must be unit norm");
    }
    const double x = q.x, y = q.y, z = q.z, w = q.w;
    RotationMatrix r;
    r.m = {{{1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)},
            {2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)},
            {2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)}}};
    return r;
}

} // namespace graspkit::geom
