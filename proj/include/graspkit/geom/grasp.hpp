#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/geom/intrinsics.hpp"
#include "graspkit/geom/rotation.hpp"

namespace graspkit::geom {

// Oriented 2D grasp rectangle: center (x, y) in pixels, extents (w, h) in
// pixels, in-plane angle theta folded into (-pi/2, pi/2], plus detector
// confidence.
struct GraspBox {
    double x;
    double y;
    double w;
    double h;
    double theta;
    double confidence;

    GraspBox(double x_, double y_, double w_, double h_, double theta_,
             double confidence_ = 1.0)
        : x(x_), y(y_), w(w_), h(h_), theta(canonical_theta(theta_)),
          confidence(confidence_) {
        if (!(w > 0.0) || !(h > 0.0)) {
            throw UsageError("GraspBox: extents must be positive, got w=" +
                             std::to_string(w) + " h=" + std::to_string(h));
        }
        if (!(confidence >= 0.0 && confidence <= 1.0)) {
            throw UsageError("GraspBox: confidence must lie in [0,1]");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw UsageError("GraspBox: center must be finite");
        }
    }
};

// End-effector grasp target in the camera frame: position in meters,
// orientation quaternion, jaw opening in meters, detector confidence.
struct GraspPrompt {
    Vec3 position;
    Quaternion orientation;
    double gripper_width;
    double confidence;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Fixed-layout JSON with 17 significant digits so values round-trip exactly.
inline std::string prompt_to_json(const GraspPrompt& p) {
    using detail::fmt17;
    return "{\"position\":[" + fmt17(p.position.x) + "," + fmt17(p.position.y) + "," +
           fmt17(p.position.z) + "],\"quaternion\":[" + fmt17(p.orientation.x) + "," +
           fmt17(p.orientation.y) + "," + fmt17(p.orientation.z) + "," +
           fmt17(p.orientation.w) + "],\"width\":" + fmt17(p.gripper_width) +
           ",\"confidence\":" + fmt17(p.confidence) + "}";
}

// Metric jaw opening from the box extent: width = w_px * z / fx (or the h
// extent against fy when configured).
enum class WidthSource { BoxW, BoxH };

inline double gripper_width_from_box(const GraspBox& box, double z, const Intrinsics& intr,
                                     WidthSource source = WidthSource::BoxW) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw GeometryError("gripper_width_from_box: depth must be positive and finite");
    }
    return source == WidthSource::BoxW ? box.w * z / intr.fx : box.h * z / intr.fy;
}

enum class DepthSampling { Bilinear, Nearest };

struct PromptOptions {
    WidthSource width_source = WidthSource::BoxW;
    DepthSampling depth_sampling = DepthSampling::Bilinear;
};

// Depth at a subpixel location. Bilinear mode renormalizes over the valid
// (non-NaN) neighbors; throws when every contributing cell is NaN.
inline double sample_depth(const DepthMap& depth, double u, double v,
                           DepthSampling mode = DepthSampling::Bilinear) {
    if (u < 0.0 || v < 0.0 || u > depth.width() - 1.0 || v > depth.height() - 1.0) {
        throw GeometryError("sample_depth: location (" + std::to_string(u) + "," +
                            std::to_string(v) + ") outside depth map bounds");
    }
    if (mode == DepthSampling::Nearest) {
        const int xi = static_cast<int>(std::lround(u));
        const int yi = static_cast<int>(std::lround(v));
        const float d = depth.at(xi, yi);
        if (std::isnan(d)) {
            throw GeometryError("sample_depth: no valid depth at pixel (" +
                                std::to_string(xi) + "," + std::to_string(yi) + ")");
        }
        return d;
    }

    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const int x1 = std::min(x0 + 1, depth.width() - 1);
    const int y1 = std::min(y0 + 1, depth.height() - 1);
    const double fx = u - x0;
    const double fy = v - y0;

    const double weights[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy),
                               (1.0 - fx) * fy, fx * fy};
    const float samples[4] = {depth.at(x0, y0), depth.at(x1, y0), depth.at(x0, y1),
                              depth.at(x1, y1)};

    double acc = 0.0;
    double wsum = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (std::isnan(samples[i])) continue;
        acc += weights[i] * samples[i];
        wsum += weights[i];
    }
    if (wsum <= 0.0) {
        throw GeometryError("sample_depth: all depth neighbors of (" + std::to_string(u) +
                            "," + std::to_string(v) + ") are invalid");
    }
    return acc / wsum;
}

// Lift an oriented 2D box to a full grasp target: depth sampled at the box
// center, center back-projected through the intrinsics, orientation from the
// in-plane angle under the top-down assumption, width from the box extent.
inline GraspPrompt box_to_prompt(const GraspBox& box, const DepthMap& depth,
                                 const Intrinsics& intr, const PromptOptions& opt = {}) {
    if (box.x < 0.0 || box.y < 0.0 || box.x > depth.width() - 1.0 ||
        box.y > depth.height() - 1.0) {
        throw GeometryError("box_to_prompt: box center (" + std::to_string(box.x) + "," +
                            std::to_string(box.y) + ") outside image bounds " +
                            std::to_string(depth.width()) + "x" +
                            std::to_string(depth.height()));
    }
    const double z = sample_depth(depth, box.x, box.y, opt.depth_sampling);
    GraspPrompt prompt;
    prompt.position = project_pixel(intr, {box.x, box.y}, z);
    prompt.orientation = matrix_to_quaternion(rotation_from_theta(box.theta));
    prompt.gripper_width = gripper_width_from_box(box, z, intr, opt.width_source);
    prompt.confidence = box.confidence;
    return prompt;
}

} // namespace graspkit::geom
