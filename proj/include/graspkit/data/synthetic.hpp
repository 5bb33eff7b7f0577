#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/geom/grasp.hpp"

namespace graspkit::data {

// Benchmark substrate: one object with a known grasp, its oriented box in
// the nominal (uncorrupted) view, and the rendered RGB/depth rasters.
struct SyntheticScene {
    geom::GraspPrompt object_pose;
    geom::GraspBox nominal_box{0, 0, 1, 1, 0};
    Image image;
    DepthMap depth;
    geom::Intrinsics intrinsics{1.0, 1.0, 0.0, 0.0};
};

struct SceneConfig {
    int width = 64;
    int height = 48;
    double focal_px = 70.0;     // fx = fy for the synthetic camera
    double min_depth_m = 0.4;   // object depth range
    double max_depth_m = 0.7;
    double table_depth_m = 0.9; // background plane
    double min_width_m = 0.03;  // grasp opening range
    double max_width_m = 0.08;
};

// Place one graspable object at a random pose in the camera frame and derive
// the oriented box the detector would report in a clean view. The depth
// raster holds the object plane inside an axis-aligned patch around the
// grasp center and the table plane elsewhere, so sampling depth at the
// nominal center recovers the object depth exactly.
inline SyntheticScene make_synthetic_scene(const SceneConfig& cfg, RandomStream& rng) {
    if (cfg.width < 8 || cfg.height < 8) {
        throw UsageError("SceneConfig: raster must be at least 8x8");
    }
    const geom::Intrinsics intr(cfg.focal_px, cfg.focal_px, (cfg.width - 1) / 2.0,
                                (cfg.height - 1) / 2.0);

    const double z = rng.next_uniform(cfg.min_depth_m, cfg.max_depth_m);
    // Keep the projected center well inside the raster.
    const double u = rng.next_uniform(cfg.width * 0.3, cfg.width * 0.7);
    const double v = rng.next_uniform(cfg.height * 0.3, cfg.height * 0.7);
    const double theta = rng.next_uniform(-geom::kPi / 2.0, geom::kPi / 2.0);
    const double width_m = rng.next_uniform(cfg.min_width_m, cfg.max_width_m);

    const double w_px = width_m * intr.fx / z;
    const double h_px = w_px * 0.4;

    SyntheticScene scene;
    scene.intrinsics = intr;
    scene.nominal_box = geom::GraspBox(u, v, w_px, h_px, theta, 1.0);
    scene.object_pose.position = geom::project_pixel(intr, {u, v}, z);
    scene.object_pose.orientation =
        geom::matrix_to_quaternion(geom::rotation_from_theta(scene.nominal_box.theta));
    scene.object_pose.gripper_width = geom::gripper_width_from_box(scene.nominal_box, z, intr);
    scene.object_pose.confidence = 1.0;

    // Object patch: double the box extent on each side of the center.
    const int px0 = std::max(0, static_cast<int>(std::floor(u - w_px)));
    const int px1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(u + w_px)));
    const int py0 = std::max(0, static_cast<int>(std::floor(v - w_px)));
    const int py1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(v + w_px)));

    scene.depth = DepthMap(cfg.width, cfg.height, static_cast<float>(cfg.table_depth_m));
    for (int y = py0; y <= py1; ++y) {
        for (int x = px0; x <= px1; ++x) {
            scene.depth.at(x, y) = static_cast<float>(z);
        }
    }

    // Mid-gray table with a brighter object patch; enough structure for the
    // exposure corruption to act on.
    scene.image = Image(cfg.width, cfg.height);
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const bool on_object = x >= px0 && x <= px1 && y >= py0 && y <= py1;
            const float base = on_object ? 0.75f : 0.35f;
            const float grad = 0.1f * static_cast<float>(x) / cfg.width;
            scene.image.at(x, y, 0) = clamp01(base + grad);
            scene.image.at(x, y, 1) = clamp01(base - 0.05f + grad);
            scene.image.at(x, y, 2) = clamp01(base - 0.1f + grad);
        }
    }
    return scene;
}

// Degradation model of the stand-in detector. Noise and miss rate grow
// linearly in d = |log(exposure / reference)|, which makes the model
// symmetric around the reference on the log-exposure axis.
struct DetectorNoiseConfig {
    double reference_ms = 100.0;
    double sigma_px = 0.0;          // position noise at the reference exposure
    double sigma_theta_rad = 0.0;   // angle noise at the reference exposure
    double pos_growth_px = 1.5;     // added position sigma per unit d
    double theta_growth_rad = 0.05; // added angle sigma per unit d
    double miss_base = 0.0;         // miss probability at the reference
    double miss_growth = 0.1;       // added miss probability per unit d
    double confidence_decay = 0.2;  // confidence = exp(-decay * d)

    void validate() const {
        if (!(reference_ms > 0.0)) {
            throw UsageError("DetectorNoiseConfig: reference_ms must be positive");
        }
        if (sigma_px < 0.0 || sigma_theta_rad < 0.0 || pos_growth_px < 0.0 ||
            theta_growth_rad < 0.0 || miss_growth < 0.0 || confidence_decay < 0.0) {
            throw UsageError("DetectorNoiseConfig: rates must be non-negative");
        }
        if (!(miss_base >= 0.0 && miss_base <= 1.0)) {
            throw UsageError("DetectorNoiseConfig: miss_base must lie in [0,1]");
        }
    }

    double log_distance(double exposure_ms) const {
        return std::abs(std::log(exposure_ms / reference_ms));
    }
    double position_sigma(double exposure_ms) const {
        return sigma_px + pos_growth_px * log_distance(exposure_ms);
    }
    double theta_sigma(double exposure_ms) const {
        return sigma_theta_rad + theta_growth_rad * log_distance(exposure_ms);
    }
    double miss_rate(double exposure_ms) const {
        return std::clamp(miss_base + miss_growth * log_distance(exposure_ms), 0.0, 1.0);
    }
    double confidence(double exposure_ms) const {
        return std::exp(-confidence_decay * log_distance(exposure_ms));
    }
};

inline DetectorNoiseConfig detector_config_from_json(const nlohmann::json& j) {
    DetectorNoiseConfig cfg;
    try {
        cfg.reference_ms = j.value("reference_ms", cfg.reference_ms);
        cfg.sigma_px = j.value("sigma_px", cfg.sigma_px);
        cfg.sigma_theta_rad = j.value("sigma_theta_rad", cfg.sigma_theta_rad);
        cfg.pos_growth_px = j.value("pos_growth_px", cfg.pos_growth_px);
        cfg.theta_growth_rad = j.value("theta_growth_rad", cfg.theta_growth_rad);
        cfg.miss_base = j.value("miss_base", cfg.miss_base);
        cfg.miss_growth = j.value("miss_growth", cfg.miss_growth);
        cfg.confidence_decay = j.value("confidence_decay", cfg.confidence_decay);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("detector config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

// Stand-in for the 2D grasp detector: returns the scene's nominal box
// perturbed by exposure-dependent Gaussian noise on (x, y, theta), or
// nothing when the detection is missed. With zero configured noise at the
// reference exposure the nominal box is returned exactly.
inline std::optional<geom::GraspBox> oracle_detector(const SyntheticScene& scene,
                                                     double exposure_ms,
                                                     const DetectorNoiseConfig& cfg,
                                                     RandomStream& rng) {
    if (!(exposure_ms > 0.0) || !std::isfinite(exposure_ms)) {
        throw UsageError("oracle_detector: exposure_ms must be positive and finite");
    }
    cfg.validate();

    if (rng.next_double() < cfg.miss_rate(exposure_ms)) {
        return std::nullopt;
    }

    const double sigma_pos = cfg.position_sigma(exposure_ms);
    const double sigma_theta = cfg.theta_sigma(exposure_ms);
    const geom::GraspBox& nominal = scene.nominal_box;

    double x = nominal.x;
    double y = nominal.y;
    double theta = nominal.theta;
    if (sigma_pos > 0.0 || sigma_theta > 0.0) {
        x += sigma_pos * rng.next_gaussian();
        y += sigma_pos * rng.next_gaussian();
        theta += sigma_theta * rng.next_gaussian();
    }
    return geom::GraspBox(x, y, nominal.w, nominal.h, theta, cfg.confidence(exposure_ms));
}

} // namespace graspkit::data
