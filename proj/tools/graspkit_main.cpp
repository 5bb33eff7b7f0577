#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graspkit/graspkit.hpp"

namespace gk = graspkit;
using nlohmann::json;

namespace {

std::vector<double> parse_csv_doubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw gk::UsageError(std::string(what) + ": cannot parse \"" + tok +
                                 "\" as a number");
        }
    }
    if (out.empty()) {
        throw gk::UsageError(std::string(what) + ": expected comma-separated numbers");
    }
    return out;
}

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw gk::IoError(std::string(what) + ": cannot open " + path);
    }
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw gk::FormatError(std::string(what) + " " + path + ": " + e.what());
    }
}

int run_augment(const std::string& in_path, const std::string& out_path,
                const std::string& config_path, std::uint64_t seed) {
    gk::aug::AugFusionConfig cfg = config_path.empty()
                                       ? gk::aug::default_config()
                                       : gk::aug::config_from_json(
                                             load_json_file(config_path, "augment config"));
    const gk::Image img = gk::io::load_image(in_path);
    gk::RandomStream rng = gk::RandomStream(seed).fork("augment");
    gk::io::save_image(gk::aug::augfusion(img, cfg, rng), out_path);
    return 0;
}

int run_prompt(const std::string& box_text, const std::string& depth_path,
               const std::string& intr_text, double depth_scale,
               const std::string& width_from, const std::string& sampling) {
    const std::vector<double> b = parse_csv_doubles(box_text, "--box");
    if (b.size() != 5 && b.size() != 6) {
        throw gk::UsageError("--box: expected x,y,w,h,theta[,confidence]");
    }
    const std::vector<double> k = parse_csv_doubles(intr_text, "--intrinsics");
    if (k.size() != 4) {
        throw gk::UsageError("--intrinsics: expected fx,fy,cx,cy");
    }
    if (!(depth_scale > 0.0)) {
        throw gk::UsageError("--depth-scale: must be positive");
    }

    gk::geom::PromptOptions opt;
    if (width_from == "h") {
        opt.width_source = gk::geom::WidthSource::BoxH;
    } else if (width_from != "w") {
        throw gk::UsageError("--width-from: expected \"w\" or \"h\"");
    }
    if (sampling == "nearest") {
        opt.depth_sampling = gk::geom::DepthSampling::Nearest;
    } else if (sampling != "bilinear") {
        throw gk::UsageError("--sampling: expected \"bilinear\" or \"nearest\"");
    }

    const gk::geom::GraspBox box(b[0], b[1], b[2], b[3], b[4],
                                 b.size() == 6 ? b[5] : 1.0);
    const gk::geom::Intrinsics intr(k[0], k[1], k[2], k[3]);
    const gk::DepthMap depth =
        gk::io::load_depth(depth_path).scaled(static_cast<float>(depth_scale));
    std::cout << gk::geom::prompt_to_json(gk::geom::box_to_prompt(box, depth, intr, opt))
              << "\n";
    return 0;
}

int run_convert(const std::string& manifest_path, const std::string& index_path,
                const std::string& out_path) {
    std::vector<std::filesystem::path> manifests;
    if (!manifest_path.empty()) manifests.push_back(manifest_path);
    if (!index_path.empty()) {
        for (const auto& p : gk::data::load_index(index_path)) manifests.push_back(p);
    }
    if (manifests.empty()) {
        throw gk::UsageError("convert: provide --manifest or --index");
    }

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        throw gk::IoError("convert: cannot open output " + out_path);
    }
    for (const auto& mp : manifests) {
        const gk::data::EpisodeManifest manifest = gk::data::load_manifest(mp);
        for (const gk::geom::GraspPrompt& prompt : gk::data::convert_episode(manifest)) {
            out << gk::geom::prompt_to_json(prompt) << "\n";
        }
    }
    return 0;
}

gk::policy::TrainSample parse_train_sample(const json& js, int index, int horizon, int dims,
                                           int cond_dim) {
    gk::policy::TrainSample sample;
    const std::string where = "train data sample " + std::to_string(index) + ": ";
    try {
        sample.conditioning = js.at("cond").get<std::vector<double>>();
        const auto& rows = js.at("trajectory");
        if (static_cast<int>(rows.size()) != horizon) {
            throw gk::UsageError(where + "expected " + std::to_string(horizon) + " rows");
        }
        sample.trajectory = gk::policy::ActionTrajectory(horizon, dims);
        for (int r = 0; r < horizon; ++r) {
            const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
            if (static_cast<int>(row.size()) != dims) {
                throw gk::UsageError(where + "row " + std::to_string(r) + " expected " +
                                     std::to_string(dims) + " values");
            }
            for (int c = 0; c < dims; ++c) {
                sample.trajectory.values[static_cast<std::size_t>(r * dims + c)] = row[c];
            }
        }
    } catch (const json::exception& e) {
        throw gk::UsageError(where + e.what());
    }
    if (static_cast<int>(sample.conditioning.size()) != cond_dim) {
        throw gk::UsageError(where + "cond expected length " + std::to_string(cond_dim));
    }
    return sample;
}

int run_train(const std::string& data_path, const std::string& out_path,
              const std::string& trace_path, int epochs, int batch, double lr, int hidden,
              int steps, double s, std::uint64_t seed) {
    const json jd = load_json_file(data_path, "train data");
    gk::policy::DenoiserConfig cfg;
    std::vector<gk::policy::TrainSample> dataset;
    try {
        cfg.horizon = jd.at("horizon").get<int>();
        cfg.dims = jd.at("dims").get<int>();
        cfg.cond_dim = jd.at("cond_dim").get<int>();
        cfg.hidden = hidden;
        const auto& samples = jd.at("samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            dataset.push_back(parse_train_sample(samples[i], static_cast<int>(i),
                                                 cfg.horizon, cfg.dims, cfg.cond_dim));
        }
    } catch (const json::exception& e) {
        throw gk::UsageError(std::string("train data: ") + e.what());
    }

    const gk::policy::NoiseSchedule sched = gk::policy::build_schedule(steps, s);
    gk::policy::TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.learning_rate = lr;
    tc.seed = seed;

    const gk::policy::TrainResult result =
        gk::policy::train_policy(dataset, cfg, sched, tc);
    gk::policy::save_denoiser_params(result.params, out_path, sched);

    if (!trace_path.empty()) {
        json trace = json::array();
        for (std::size_t e = 0; e < result.epoch_rmse.size(); ++e) {
            trace.push_back({{"epoch", e}, {"rmse", result.epoch_rmse[e]}});
        }
        std::ofstream out(trace_path, std::ios::trunc);
        if (!out) {
            throw gk::IoError("train: cannot open trace output " + trace_path);
        }
        out << trace.dump(2) << "\n";
    }
    std::cerr << "trained " << dataset.size() << " samples for " << epochs
              << " epochs, final rmse " << result.epoch_rmse.back() << "\n";
    return 0;
}

int run_sample(const std::string& params_path, const std::string& cond_text,
               const std::string& out_path, std::uint64_t seed) {
    const gk::policy::LoadedDenoiser loaded = gk::policy::load_denoiser_params(params_path);
    gk::la::Vec cond;
    if (!cond_text.empty()) {
        cond = parse_csv_doubles(cond_text, "--cond");
    }
    if (static_cast<int>(cond.size()) != loaded.params.cfg.cond_dim) {
        throw gk::UsageError("--cond: expected " +
                             std::to_string(loaded.params.cfg.cond_dim) + " values, got " +
                             std::to_string(cond.size()));
    }

    gk::RandomStream rng = gk::RandomStream(seed).fork("sample");
    const gk::policy::ActionTrajectory traj =
        gk::policy::sample_actions(loaded.params, cond, loaded.schedule, rng);

    json rows = json::array();
    for (int r = 0; r < traj.horizon; ++r) {
        json row = json::array();
        for (int c = 0; c < traj.dims; ++c) {
            row.push_back(traj.values[static_cast<std::size_t>(r * traj.dims + c)]);
        }
        rows.push_back(row);
    }
    const json out = {{"horizon", traj.horizon}, {"dims", traj.dims}, {"actions", rows}};
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path, std::ios::trunc);
        if (!f) {
            throw gk::IoError("sample: cannot open output " + out_path);
        }
        f << out.dump(2) << "\n";
    }
    return 0;
}

gk::bench::SweepConfig sweep_config_from_json(const json& j) {
    gk::bench::SweepConfig cfg;
    try {
        if (j.contains("exposure_levels_ms")) {
            cfg.exposure_levels_ms = j.at("exposure_levels_ms").get<std::vector<double>>();
        }
        cfg.trials_per_level = j.value("trials_per_level", cfg.trials_per_level);
        cfg.reference_ms = j.value("reference_ms", cfg.reference_ms);
        cfg.task_tolerance_scale = j.value("task_tolerance_scale", cfg.task_tolerance_scale);
        cfg.scene_seed = j.value("scene_seed", cfg.scene_seed);
        if (j.contains("tolerance")) {
            cfg.tolerance.position_m =
                j.at("tolerance").value("position_m", cfg.tolerance.position_m);
            cfg.tolerance.angle_rad =
                j.at("tolerance").value("angle_rad", cfg.tolerance.angle_rad);
        }
        if (j.contains("scene")) {
            const auto& js = j.at("scene");
            cfg.scene.width = js.value("width", cfg.scene.width);
            cfg.scene.height = js.value("height", cfg.scene.height);
            cfg.scene.focal_px = js.value("focal_px", cfg.scene.focal_px);
            cfg.scene.min_depth_m = js.value("min_depth_m", cfg.scene.min_depth_m);
            cfg.scene.max_depth_m = js.value("max_depth_m", cfg.scene.max_depth_m);
            cfg.scene.table_depth_m = js.value("table_depth_m", cfg.scene.table_depth_m);
            cfg.scene.min_width_m = js.value("min_width_m", cfg.scene.min_width_m);
            cfg.scene.max_width_m = js.value("max_width_m", cfg.scene.max_width_m);
        }
    } catch (const json::exception& e) {
        throw gk::UsageError(std::string("sweep config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

int run_sweep_cmd(const std::string& config_path, const std::string& report_json_path,
                  const std::string& report_csv_path, const std::string& log_path,
                  std::optional<std::uint64_t> seed_override) {
    json jc = json::object();
    if (!config_path.empty()) jc = load_json_file(config_path, "sweep config");

    gk::bench::SweepConfig cfg = sweep_config_from_json(jc);
    if (seed_override.has_value()) cfg.scene_seed = *seed_override;
    const gk::data::DetectorNoiseConfig detector =
        jc.contains("detector") ? gk::data::detector_config_from_json(jc.at("detector"))
                                : gk::data::DetectorNoiseConfig{};

    std::vector<gk::bench::TrialOutcome> log;
    const gk::bench::SweepReport report =
        gk::bench::run_sweep(cfg, gk::bench::make_oracle_pipeline(detector), &log);

    gk::bench::write_outcome_log(log, log_path, cfg.trials_per_level);
    if (!report_json_path.empty()) {
        gk::bench::emit_report(report, gk::bench::ReportFormat::Json, report_json_path);
    }
    if (!report_csv_path.empty()) {
        gk::bench::emit_report(report, gk::bench::ReportFormat::Csv, report_csv_path);
    }
    if (report_json_path.empty() && report_csv_path.empty()) {
        std::cout << gk::bench::report_to_csv(report);
    }
    return 0;
}

int run_report(const std::string& log_path, const std::string& format,
               const std::string& out_path) {
    if (format != "csv" && format != "json") {
        throw gk::UsageError("--format: expected \"csv\" or \"json\"");
    }
    const std::vector<gk::bench::TrialOutcome> outcomes =
        gk::bench::load_outcome_log(log_path);
    if (outcomes.empty()) {
        throw gk::FormatError("report: outcome log " + log_path + " is empty");
    }
    const gk::bench::SweepReport report = gk::bench::report_from_outcomes(outcomes);
    if (out_path.empty()) {
        if (format == "csv") {
            std::cout << gk::bench::report_to_csv(report);
        } else {
            std::cout << gk::bench::report_to_json(report).dump(2) << "\n";
        }
    } else {
        gk::bench::emit_report(report,
                               format == "csv" ? gk::bench::ReportFormat::Csv
                                               : gk::bench::ReportFormat::Json,
                               out_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale grasp perception and diffusion policy toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool seed_given = false;
    const auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "random seed (default 0)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    // augment
    auto* augment = app.add_subcommand("augment", "apply chain/mixture augmentation to a PPM");
    std::string aug_in, aug_out, aug_cfg;
    augment->add_option("--in", aug_in, "input PPM (P6)")->required();
    augment->add_option("--out", aug_out, "output PPM (P6)")->required();
    augment->add_option("--config", aug_cfg, "augmentation config JSON");
    add_seed(augment);

    // prompt
    auto* prompt = app.add_subcommand("prompt", "convert one oriented box to a grasp prompt");
    std::string box_text, depth_path, intr_text, width_from = "w", sampling = "bilinear";
    double depth_scale = 1.0;
    prompt->add_option("--box", box_text, "x,y,w,h,theta[,confidence]")->required();
    prompt->add_option("--depth", depth_path, "depth PFM (Pf)")->required();
    prompt->add_option("--intrinsics", intr_text, "fx,fy,cx,cy")->required();
    prompt->add_option("--depth-scale", depth_scale, "metric scale for stored depth");
    prompt->add_option("--width-from", width_from, "box extent for the gripper width: w|h");
    prompt->add_option("--sampling", sampling, "depth sampling: bilinear|nearest");

    // convert
    auto* convert = app.add_subcommand("convert", "convert episode annotations to prompts");
    std::string manifest_path, index_path, convert_out;
    convert->add_option("--manifest", manifest_path, "episode manifest JSON");
    convert->add_option("--index", index_path, "dataset index JSON");
    convert->add_option("--out", convert_out, "output prompts JSONL")->required();

    // train
    auto* train = app.add_subcommand("train", "train the diffusion action head");
    std::string train_data, train_out, train_trace;
    int epochs = 200, batch = 16, hidden = 64, steps = 16;
    double lr = 0.02, sched_s = 0.008;
    train->add_option("--data", train_data, "training dataset JSON")->required();
    train->add_option("--out", train_out, "output parameter file")->required();
    train->add_option("--trace", train_trace, "per-epoch loss trace JSON");
    train->add_option("--epochs", epochs, "training epochs (default 200)");
    train->add_option("--batch", batch, "minibatch size (default 16)");
    train->add_option("--lr", lr, "learning rate (default 0.02)");
    train->add_option("--hidden", hidden, "denoiser hidden width (default 64)");
    train->add_option("--steps", steps, "diffusion steps (default 16)");
    train->add_option("--s", sched_s, "cosine schedule offset (default 0.008)");
    add_seed(train);

    // sample
    auto* sample = app.add_subcommand("sample", "sample an action trajectory");
    std::string sample_params, cond_text, sample_out;
    sample->add_option("--params", sample_params, "trained parameter file")->required();
    sample->add_option("--cond", cond_text, "conditioning vector v1,v2,...");
    sample->add_option("--out", sample_out, "output trajectory JSON (default stdout)");
    add_seed(sample);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the exposure robustness sweep");
    std::string sweep_cfg_path, report_json_path, report_csv_path, sweep_log_path;
    sweep->add_option("--config", sweep_cfg_path, "sweep config JSON");
    sweep->add_option("--report-json", report_json_path, "output report JSON");
    sweep->add_option("--report-csv", report_csv_path, "output report CSV");
    sweep->add_option("--log", sweep_log_path, "raw per-trial outcome JSONL")->required();
    add_seed(sweep);

    // report
    auto* report = app.add_subcommand("report", "rebuild metrics from an outcome log");
    std::string report_log, report_format = "csv", report_out;
    report->add_option("--log", report_log, "outcome JSONL from a sweep")->required();
    report->add_option("--format", report_format, "csv|json (default csv)");
    report->add_option("--out", report_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (augment->parsed()) return run_augment(aug_in, aug_out, aug_cfg, seed);
        if (prompt->parsed()) {
            return run_prompt(box_text, depth_path, intr_text, depth_scale, width_from,
                              sampling);
        }
        if (convert->parsed()) return run_convert(manifest_path, index_path, convert_out);
        if (train->parsed()) {
            return run_train(train_data, train_out, train_trace, epochs, batch, lr, hidden,
                             steps, sched_s, seed);
        }
        if (sample->parsed()) return run_sample(sample_params, cond_text, sample_out, seed);
        if (sweep->parsed()) {
            return run_sweep_cmd(sweep_cfg_path, report_json_path, report_csv_path,
                                 sweep_log_path,
                                 seed_given ? std::optional<std::uint64_t>(seed)
                                            : std::nullopt);
        }
        if (report->parsed()) return run_report(report_log, report_format, report_out);
    } catch (const gk::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
