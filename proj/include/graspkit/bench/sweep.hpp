#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/augment/exposure.hpp"
#include "graspkit/bench/metrics.hpp"
#include "graspkit/core/error.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/data/synthetic.hpp"
#include "graspkit/geom/grasp.hpp"

namespace graspkit::bench {

struct SweepConfig {
    std::vector<double> exposure_levels_ms = aug::benchmark_exposure_levels();
    int trials_per_level = 100;
    double reference_ms = 100.0;
    Tolerance tolerance;
    // A completed task demands a tighter execution than a bare grasp; the
    // task thresholds are the grasp thresholds scaled by this factor.
    double task_tolerance_scale = 0.75;
    std::uint64_t scene_seed = 0;
    data::SceneConfig scene;

    void validate() const {
        if (exposure_levels_ms.empty()) {
            throw UsageError("SweepConfig: exposure levels must be non-empty");
        }
        for (double e : exposure_levels_ms) {
            if (!(e > 0.0)) {
                throw UsageError("SweepConfig: exposure levels must be positive");
            }
        }
        if (trials_per_level < 1) {
            throw UsageError("SweepConfig: trials_per_level must be >= 1");
        }
        if (!(reference_ms > 0.0)) {
            throw UsageError("SweepConfig: reference_ms must be positive");
        }
        if (!(task_tolerance_scale > 0.0 && task_tolerance_scale <= 1.0)) {
            throw UsageError("SweepConfig: task_tolerance_scale must lie in (0,1]");
        }
        tolerance.validate();
    }
};

struct LevelResult {
    double exposure_ms = 0.0;
    double tsr = 0.0;
    double gsr = 0.0;
    int n = 0;
};

struct SweepReport {
    std::vector<LevelResult> levels;
    double avg_tsr = 0.0;
    double avg_gsr = 0.0;
};

// Everything a pipeline may look at for one trial: the scene ground truth
// carrier, the exposure-corrupted view and the exposure setting itself.
struct PipelineInput {
    const data::SyntheticScene& scene;
    const Image& corrupted;
    double exposure_ms;
};

// scene -> predicted grasp, or nothing on a missed detection.
using Pipeline =
    std::function<std::optional<geom::GraspPrompt>(const PipelineInput&, RandomStream&)>;

// Detector oracle followed by the box-to-prompt geometry. A detection whose
// center leaves the raster converts to no prediction.
inline Pipeline make_oracle_pipeline(const data::DetectorNoiseConfig& detector,
                                     const geom::PromptOptions& opt = {}) {
    detector.validate();
    return [detector, opt](const PipelineInput& in,
                           RandomStream& rng) -> std::optional<geom::GraspPrompt> {
        const std::optional<geom::GraspBox> box =
            data::oracle_detector(in.scene, in.exposure_ms, detector, rng);
        if (!box.has_value()) return std::nullopt;
        try {
            return geom::box_to_prompt(*box, in.scene.depth, in.scene.intrinsics, opt);
        } catch (const GeometryError&) {
            return std::nullopt;
        }
    };
}

inline SweepReport run_sweep(const SweepConfig& cfg, const Pipeline& pipeline,
                             std::vector<TrialOutcome>* outcome_log = nullptr) {
    cfg.validate();
    RandomStream root(cfg.scene_seed);

    SweepReport report;
    report.levels.reserve(cfg.exposure_levels_ms.size());

    for (std::size_t li = 0; li < cfg.exposure_levels_ms.size(); ++li) {
        const double exposure = cfg.exposure_levels_ms[li];
        RandomStream level_rng = root.fork("level:" + std::to_string(li));

        std::vector<TrialOutcome> outcomes;
        outcomes.reserve(static_cast<std::size_t>(cfg.trials_per_level));
        for (int trial = 0; trial < cfg.trials_per_level; ++trial) {
            RandomStream trial_rng = level_rng.fork("trial:" + std::to_string(trial));
            RandomStream scene_rng = trial_rng.fork("scene");
            RandomStream pipe_rng = trial_rng.fork("pipeline");

            TrialOutcome outcome;
            outcome.exposure_ms = exposure;
            try {
                const data::SyntheticScene scene =
                    data::make_synthetic_scene(cfg.scene, scene_rng);
                const Image corrupted =
                    aug::simulate_exposure(scene.image, exposure, cfg.reference_ms);

                const std::optional<geom::GraspPrompt> pred =
                    pipeline(PipelineInput{scene, corrupted, exposure}, pipe_rng);
                if (pred.has_value()) {
                    outcome.detected = true;
                    outcome.position_error_m =
                        norm(pred->position - scene.object_pose.position);
                    outcome.angle_error_rad =
                        geom::quaternion_angle(pred->orientation,
                                               scene.object_pose.orientation);
                    outcome.grasp_success =
                        judge_grasp(*pred, scene.object_pose, cfg.tolerance);
                    Tolerance task_tol{cfg.tolerance.position_m * cfg.task_tolerance_scale,
                                       cfg.tolerance.angle_rad * cfg.task_tolerance_scale};
                    outcome.task_success =
                        outcome.grasp_success &&
                        judge_grasp(*pred, scene.object_pose, task_tol);
                }
            } catch (const std::exception& e) {
                throw ValidationError("sweep level " + std::to_string(li) + " trial " +
                                      std::to_string(trial) + ": " + e.what());
            }
            outcomes.push_back(outcome);
            if (outcome_log) outcome_log->push_back(outcome);
        }

        LevelResult lr;
        lr.exposure_ms = exposure;
        lr.tsr = compute_tsr(outcomes);
        lr.gsr = compute_gsr(outcomes);
        lr.n = cfg.trials_per_level;
        report.levels.push_back(lr);
    }

    for (const LevelResult& lr : report.levels) {
        report.avg_tsr += lr.tsr;
        report.avg_gsr += lr.gsr;
    }
    report.avg_tsr /= static_cast<double>(report.levels.size());
    report.avg_gsr /= static_cast<double>(report.levels.size());
    return report;
}

namespace detail {

inline std::string format_level(double ms) {
    char buf[32];
    if (ms == std::floor(ms) && std::abs(ms) < 1e9) {
        std::snprintf(buf, sizeof(buf), "%.0f", ms);
    } else {
        std::snprintf(buf, sizeof(buf), "%g", ms);
    }
    return buf;
}

inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// CSV in the shape of the exposure-sweep results table: one column per
// level plus the unweighted average, percentages with one decimal.
inline std::string report_to_csv(const SweepReport& report) {
    std::string out = "metric";
    for (const LevelResult& lr : report.levels) {
        out += "," + detail::format_level(lr.exposure_ms);
    }
    out += ",AVG\nTSR";
    for (const LevelResult& lr : report.levels) {
        out += "," + detail::format_percent(lr.tsr);
    }
    out += "," + detail::format_percent(report.avg_tsr) + "\nGSR";
    for (const LevelResult& lr : report.levels) {
        out += "," + detail::format_percent(lr.gsr);
    }
    out += "," + detail::format_percent(report.avg_gsr) + "\n";
    return out;
}

inline nlohmann::json report_to_json(const SweepReport& report) {
    nlohmann::json levels = nlohmann::json::array();
    for (const LevelResult& lr : report.levels) {
        levels.push_back({{"exposure_ms", lr.exposure_ms},
                          {"tsr", lr.tsr},
                          {"gsr", lr.gsr},
                          {"n", lr.n}});
    }
    return {{"schema_version", 1},
            {"levels", levels},
            {"avg_tsr", report.avg_tsr},
            {"avg_gsr", report.avg_gsr}};
}

inline SweepReport report_from_json(const nlohmann::json& j) {
    SweepReport report;
    try {
        for (const auto& jl : j.at("levels")) {
            LevelResult lr;
            lr.exposure_ms = jl.at("exposure_ms").get<double>();
            lr.tsr = jl.at("tsr").get<double>();
            lr.gsr = jl.at("gsr").get<double>();
            lr.n = jl.at("n").get<int>();
            report.levels.push_back(lr);
        }
        report.avg_tsr = j.at("avg_tsr").get<double>();
        report.avg_gsr = j.at("avg_gsr").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("sweep report: ") + e.what());
    }
    return report;
}

enum class ReportFormat { Csv, Json };

inline void emit_report(const SweepReport& report, ReportFormat format,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open report path for writing: " + path.string());
    }
    if (format == ReportFormat::Csv) {
        out << report_to_csv(report);
    } else {
        out << report_to_json(report).dump(2) << "\n";
    }
    if (!out) {
        throw IoError("report write failed: " + path.string());
    }
}

// Build the report back from raw outcome lines, grouped by exposure in
// first-seen order.
inline SweepReport report_from_outcomes(const std::vector<TrialOutcome>& outcomes) {
    if (outcomes.empty()) {
        throw UsageError("report_from_outcomes: outcome list must be non-empty");
    }
    std::vector<double> order;
    std::vector<std::vector<TrialOutcome>> grouped;
    for (const TrialOutcome& o : outcomes) {
        std::size_t idx = order.size();
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (order[i] == o.exposure_ms) {
                idx = i;
                break;
            }
        }
        if (idx == order.size()) {
            order.push_back(o.exposure_ms);
            grouped.emplace_back();
        }
        grouped[idx].push_back(o);
    }

    SweepReport report;
    for (std::size_t i = 0; i < order.size(); ++i) {
        LevelResult lr;
        lr.exposure_ms = order[i];
        lr.tsr = compute_tsr(grouped[i]);
        lr.gsr = compute_gsr(grouped[i]);
        lr.n = static_cast<int>(grouped[i].size());
        report.levels.push_back(lr);
        report.avg_tsr += lr.tsr;
        report.avg_gsr += lr.gsr;
    }
    report.avg_tsr /= static_cast<double>(report.levels.size());
    report.avg_gsr /= static_cast<double>(report.levels.size());
    return report;
}

inline void write_outcome_log(const std::vector<TrialOutcome>& outcomes,
                              const std::filesystem::path& path, int trials_per_level) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open outcome log for writing: " + path.string());
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const int level_index = static_cast<int>(i) / trials_per_level;
        const int trial = static_cast<int>(i) % trials_per_level;
        out << outcome_to_json(outcomes[i], level_index, trial).dump() << "\n";
    }
}

inline std::vector<TrialOutcome> load_outcome_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open outcome log: " + path.string());
    }
    std::vector<TrialOutcome> outcomes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            outcomes.push_back(outcome_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw FormatError("outcome log " + path.string() + " line " +
                              std::to_string(line_no) + ": " + e.what());
        }
    }
    return outcomes;
}

} // namespace graspkit::bench
