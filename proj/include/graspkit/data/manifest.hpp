#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"
#include "graspkit/geom/grasp.hpp"
#include "graspkit/geom/intrinsics.hpp"
#include "graspkit/geom/rotation.hpp"
#include "graspkit/io/pfm.hpp"

namespace graspkit::data {

// Proprioceptive state for one frame.
struct RobotState {
    geom::Vec3 ee_position;
    geom::Quaternion ee_orientation;
    double gripper_status = 1.0; // 0 closed .. 1 open
};

struct Frame {
    std::filesystem::path rgb_path;
    std::filesystem::path depth_path;
    RobotState state;
    std::optional<geom::GraspBox> grasp_box;
    std::string task_prompt;
};

// One demonstration episode: synchronized RGB/depth frames plus the fixed
// camera intrinsics and the scale converting stored depth to meters.
struct EpisodeManifest {
    std::string episode_id;
    std::vector<Frame> frames;
    geom::Intrinsics intrinsics{1.0, 1.0, 0.0, 0.0};
    double depth_scale = 1.0;
};

namespace detail {

[[noreturn]] inline void manifest_fail(const std::filesystem::path& path,
                                       const std::string& what) {
    throw ValidationError("manifest " + path.string() + ": " + what);
}

inline geom::Vec3 parse_vec3(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw nlohmann::json::type_error::create(302, "expected 3-element array", &j);
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline geom::Quaternion parse_quaternion(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 4) {
        throw ValidationError(field + ": expected [qx,qy,qz,qw]");
    }
    geom::Quaternion q{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                       j[3].get<double>()};
    if (std::abs(q.norm() - 1.0) > 1e-6) {
        throw ValidationError(field + ": quaternion norm " + std::to_string(q.norm()) +
                              " is not unit");
    }
    return q;
}

} // namespace detail

inline constexpr int kManifestSchemaVersion = 1;

// Load and validate an episode manifest. Relative frame paths are resolved
// against the manifest's directory; every referenced file must exist.
inline EpisodeManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        detail::manifest_fail(path, std::string("invalid JSON: ") + e.what());
    }

    EpisodeManifest m;
    const std::filesystem::path base = path.parent_path();
    try {
        if (j.value("schema_version", 0) != kManifestSchemaVersion) {
            detail::manifest_fail(path, "schema_version: expected " +
                                            std::to_string(kManifestSchemaVersion));
        }
        m.episode_id = j.at("episode_id").get<std::string>();

        const auto& ji = j.at("intrinsics");
        m.intrinsics = geom::Intrinsics(ji.at("fx").get<double>(), ji.at("fy").get<double>(),
                                        ji.at("cx").get<double>(), ji.at("cy").get<double>());

        m.depth_scale = j.at("depth_scale").get<double>();
        if (!(m.depth_scale > 0.0) || !std::isfinite(m.depth_scale)) {
            detail::manifest_fail(path, "depth_scale: must be > 0, got " +
                                            std::to_string(m.depth_scale));
        }

        const auto& frames = j.at("frames");
        if (!frames.is_array() || frames.empty()) {
            detail::manifest_fail(path, "frames: must be a non-empty array");
        }
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const std::string where = "frame " + std::to_string(i) + ": ";
            const auto& jf = frames[i];
            Frame f;
            try {
                f.rgb_path = base / jf.at("rgb_path").get<std::string>();
                f.depth_path = base / jf.at("depth_path").get<std::string>();

                const auto& js = jf.at("state");
                f.state.ee_position = detail::parse_vec3(js.at("ee_position"));
                f.state.ee_orientation =
                    detail::parse_quaternion(js.at("ee_orientation"), "state.ee_orientation");
                f.state.gripper_status = js.at("gripper_status").get<double>();
                if (!(f.state.gripper_status >= 0.0 && f.state.gripper_status <= 1.0)) {
                    throw ValidationError("state.gripper_status: must lie in [0,1]");
                }

                if (jf.contains("grasp_box") && !jf.at("grasp_box").is_null()) {
                    const auto& jb = jf.at("grasp_box");
                    f.grasp_box =
                        geom::GraspBox(jb.at("x").get<double>(), jb.at("y").get<double>(),
                                       jb.at("w").get<double>(), jb.at("h").get<double>(),
                                       jb.at("theta").get<double>(),
                                       jb.value("confidence", 1.0));
                }
                f.task_prompt = jf.value("task_prompt", std::string());

                if (!std::filesystem::exists(f.rgb_path)) {
                    throw ValidationError("rgb_path: file not found: " + f.rgb_path.string());
                }
                if (!std::filesystem::exists(f.depth_path)) {
                    throw ValidationError("depth_path: file not found: " +
                                          f.depth_path.string());
                }
            } catch (const ValidationError& e) {
                detail::manifest_fail(path, where + e.what());
            } catch (const UsageError& e) {
                detail::manifest_fail(path, where + e.what());
            } catch (const nlohmann::json::exception& e) {
                detail::manifest_fail(path, where + e.what());
            }
            m.frames.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        detail::manifest_fail(path, e.what());
    } catch (const UsageError& e) {
        detail::manifest_fail(path, e.what());
    }
    return m;
}

// Dataset-level index: a list of episode manifest paths.
inline std::vector<std::filesystem::path> load_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open index: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
        std::vector<std::filesystem::path> out;
        for (const auto& e : j.at("episodes")) {
            out.push_back(path.parent_path() / e.get<std::string>());
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("index " + path.string() + ": " + e.what());
    }
}

// Convert every annotated frame of an episode into a grasp prompt. Either
// all annotated frames convert or the episode fails as a whole; errors carry
// the frame index.
inline std::vector<geom::GraspPrompt> convert_episode(const EpisodeManifest& manifest,
                                                      const geom::PromptOptions& opt = {}) {
    std::vector<geom::GraspPrompt> prompts;
    for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
        const Frame& f = manifest.frames[i];
        if (!f.grasp_box.has_value()) continue;
        try {
            const DepthMap depth =
                io::load_depth(f.depth_path).scaled(static_cast<float>(manifest.depth_scale));
            prompts.push_back(geom::box_to_prompt(*f.grasp_box, depth, manifest.intrinsics, opt));
        } catch (const std::exception& e) {
            throw ValidationError("episode " + manifest.episode_id + ", frame " +
                                  std::to_string(i) + ": " + e.what());
        }
    }
    return prompts;
}

} // namespace graspkit::data
