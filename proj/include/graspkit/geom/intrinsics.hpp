#pragma once

#include <array>
#include <cmath>
#include <string>

#include "graspkit/core/error.hpp"

namespace graspkit::geom {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(squared_norm(a)); }

// Pinhole camera parameters: focal lengths and principal point in pixels.
struct Intrinsics {
    double fx;
    double fy;
    double cx;
    double cy;

    Intrinsics(double fx_, double fy_, double cx_, double cy_)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
        if (!(fx > 0.0) || !(fy > 0.0)) {
            throw UsageError("Intrinsics: focal lengths must be positive");
        }
    }
};

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

// Back-project a pixel at depth z meters into the camera frame:
//   x = (u - cx) * z / fx,  y = (v - cy) * z / fy,  and z unchanged.
inline Vec3 project_pixel(const Intrinsics& intr, const PixelCoord& px, double z) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw GeometryError("project_pixel: depth must be positive and finite, got " +
                            std::to_string(z));
    }
    return {(px.u - intr.cx) * z / intr.fx, (px.v - intr.cy) * z / intr.fy, z};
}

// Forward projection, the analytic inverse of project_pixel.
inline PixelCoord project_to_pixel(const Intrinsics& intr, const Vec3& p) {
    if (!(p.z > 0.0) || !std::isfinite(p.z)) {
        throw GeometryError("project_to_pixel: point must lie in front of the camera");
    }
    return {p.x * intr.fx / p.z + intr.cx, p.y * intr.fy / p.z + intr.cy};
}

} // namespace graspkit::geom
