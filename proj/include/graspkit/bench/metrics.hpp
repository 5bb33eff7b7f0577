#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"
#include "graspkit/geom/grasp.hpp"
#include "graspkit/geom/rotation.hpp"

namespace graspkit::bench {

struct Tolerance {
    double position_m = 0.02;
    double angle_rad = 0.15;

    void validate() const {
        if (!(position_m > 0.0) || !(angle_rad > 0.0)) {
            throw UsageError("Tolerance: thresholds must be positive");
        }
    }
};

// Pose-threshold stand-in for a human success judgment. Success iff the
// position error is within tol.position_m (boundary inclusive, compared in
// squared form so the boundary is exact) and the geodesic angle between the
// orientations is within tol.angle_rad.
inline bool judge_grasp(const geom::GraspPrompt& pred, const geom::GraspPrompt& truth,
                        const Tolerance& tol) {
    tol.validate();
    const geom::Vec3 d = pred.position - truth.position;
    if (squared_norm(d) > tol.position_m * tol.position_m) return false;
    return geom::quaternion_angle(pred.orientation, truth.orientation) <= tol.angle_rad;
}

// One benchmark trial. A missed detection has detected == false and NaN
// errors; task success implies grasp success by construction.
struct TrialOutcome {
    double exposure_ms = 0.0;
    bool detected = false;
    bool grasp_success = false;
    bool task_success = false;
    double position_error_m = std::numeric_limits<double>::quiet_NaN();
    double angle_error_rad = std::numeric_limits<double>::quiet_NaN();
};

inline double compute_gsr(const std::vector<TrialOutcome>& outcomes) {
    if (outcomes.empty()) {
        throw UsageError("compute_gsr: outcome list must be non-empty");
    }
    std::size_t successes = 0;
    for (const TrialOutcome& o : outcomes) {
        if (o.grasp_success) ++successes;
    }
    return static_cast<double>(successes) / static_cast<double>(outcomes.size());
}

inline double compute_tsr(const std::vector<TrialOutcome>& outcomes) {
    if (outcomes.empty()) {
        throw UsageError("compute_tsr: outcome list must be non-empty");
    }
    std::size_t successes = 0;
    for (const TrialOutcome& o : outcomes) {
        if (o.task_success) ++successes;
    }
    return static_cast<double>(successes) / static_cast<double>(outcomes.size());
}

inline nlohmann::json outcome_to_json(const TrialOutcome& o, int level_index, int trial) {
    nlohmann::json j = {{"level_index", level_index},
                        {"trial", trial},
                        {"exposure_ms", o.exposure_ms},
                        {"detected", o.detected},
                        {"grasp_success", o.grasp_success},
                        {"task_success", o.task_success}};
    if (std::isnan(o.position_error_m)) {
        j["position_error_m"] = nullptr;
        j["angle_error_rad"] = nullptr;
    } else {
        j["position_error_m"] = o.position_error_m;
        j["angle_error_rad"] = o.angle_error_rad;
    }
    return j;
}

inline TrialOutcome outcome_from_json(const nlohmann::json& j) {
    TrialOutcome o;
    try {
        o.exposure_ms = j.at("exposure_ms").get<double>();
        o.detected = j.at("detected").get<bool>();
        o.grasp_success = j.at("grasp_success").get<bool>();
        o.task_success = j.at("task_success").get<bool>();
        if (j.contains("position_error_m") && !j.at("position_error_m").is_null()) {
            o.position_error_m = j.at("position_error_m").get<double>();
            o.angle_error_rad = j.at("angle_error_rad").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("trial outcome: ") + e.what());
    }
    if (o.task_success && !o.grasp_success) {
        throw FormatError("trial outcome: task_success without grasp_success");
    }
    return o;
}

} // namespace graspkit::bench
