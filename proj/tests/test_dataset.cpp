#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "graspkit/data/manifest.hpp"
#include "graspkit/data/synthetic.hpp"
#include "graspkit/io/pfm.hpp"
#include "graspkit/io/ppm.hpp"

using graspkit::DepthMap;
using graspkit::Image;
using graspkit::RandomStream;
using graspkit::ValidationError;
namespace data = graspkit::data;
namespace geom = graspkit::geom;
namespace io = graspkit::io;
using nlohmann::json;

namespace {

struct TempDataset {
    std::filesystem::path dir;

    TempDataset() {
        dir = std::filesystem::temp_directory_path() /
              ("graspkit_ds_" + std::to_string(::getpid())) /
              std::to_string(counter()++);
        std::filesystem::create_directories(dir);
    }

    static int& counter() {
        static int c = 0;
        return c;
    }

    std::filesystem::path write_manifest(const json& j) const {
        const auto p = dir / "manifest.json";
        std::ofstream out(p);
        out << j.dump(2);
        return p;
    }
};

json base_manifest() {
    return {
        {"schema_version", 1},
        {"episode_id", "ep0"},
        {"intrinsics", {{"fx", 600.0}, {"fy", 600.0}, {"cx", 320.0}, {"cy", 240.0}}},
        {"depth_scale", 1.0},
        {"frames", json::array()},
    };
}

json frame_entry(const std::string& rgb, const std::string& depth, bool with_box) {
    json f = {
        {"rgb_path", rgb},
        {"depth_path", depth},
        {"state",
         {{"ee_position", {0.1, 0.0, 0.3}},
          {"ee_orientation", {0.0, 0.0, 0.0, 1.0}},
          {"gripper_status", 1.0}}},
        {"task_prompt", "pick_big"},
    };
    if (with_box) {
        f["grasp_box"] = {{"x", 320.0}, {"y", 240.0}, {"w", 60.0},
                          {"h", 20.0},  {"theta", 0.0}, {"confidence", 0.9}};
    }
    return f;
}

void write_frame_files(const TempDataset& t, const std::string& rgb,
                       const std::string& depth, float depth_value = 0.5f) {
    io::save_image(Image(8, 6, 0.5f), t.dir / rgb);
    io::save_depth(DepthMap(640, 480, depth_value), t.dir / depth);
}

} // namespace

TEST_CASE("minimal valid one-frame manifest loads") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm");
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", true));

    const data::EpisodeManifest m = data::load_manifest(t.write_manifest(j));
    REQUIRE(m.episode_id == "ep0");
    REQUIRE(m.frames.size() == 1);
    REQUIRE(m.frames[0].grasp_box.has_value());
    REQUIRE(m.frames[0].task_prompt == "pick_big");
    REQUIRE(m.intrinsics.fx == 600.0);
}

TEST_CASE("zero depth_scale is rejected naming the field") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm");
    json j = base_manifest();
    j["depth_scale"] = 0.0;
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", false));
    REQUIRE_THROWS_WITH(data::load_manifest(t.write_manifest(j)),
                        Catch::Matchers::ContainsSubstring("depth_scale"));
}

TEST_CASE("missing depth file is reported with the frame index") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm");
    io::save_image(Image(8, 6, 0.5f), t.dir / "f1.ppm");
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", false));
    j["frames"].push_back(frame_entry("f1.ppm", "missing.pfm", false));
    REQUIRE_THROWS_WITH(data::load_manifest(t.write_manifest(j)),
                        Catch::Matchers::ContainsSubstring("frame 1") &&
                            Catch::Matchers::ContainsSubstring("depth_path"));
}

TEST_CASE("non-unit quaternion is a validation error") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm");
    json j = base_manifest();
    json f = frame_entry("f0.ppm", "f0.pfm", false);
    f["state"]["ee_orientation"] = {0.0, 0.0, 0.0, 0.9};
    j["frames"].push_back(f);
    REQUIRE_THROWS_AS(data::load_manifest(t.write_manifest(j)), ValidationError);
}

TEST_CASE("empty frame list is rejected") {
    TempDataset t;
    REQUIRE_THROWS_WITH(data::load_manifest(t.write_manifest(base_manifest())),
                        Catch::Matchers::ContainsSubstring("frames"));
}

TEST_CASE("convert_episode yields one prompt per annotated frame, in order") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm", 0.5f);
    write_frame_files(t, "f1.ppm", "f1.pfm", 0.25f);
    write_frame_files(t, "f2.ppm", "f2.pfm", 0.75f);
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", true));
    j["frames"].push_back(frame_entry("f1.ppm", "f1.pfm", false));
    json f2 = frame_entry("f2.ppm", "f2.pfm", true);
    f2["grasp_box"]["x"] = 440.0;
    j["frames"].push_back(f2);

    const auto prompts = data::convert_episode(data::load_manifest(t.write_manifest(j)));
    REQUIRE(prompts.size() == 2);
    REQUIRE(prompts[0].position.z == Catch::Approx(0.5));
    REQUIRE(prompts[1].position.z == Catch::Approx(0.75));
    REQUIRE(prompts[1].position.x == Catch::Approx((440.0 - 320.0) * 0.75 / 600.0));
}

TEST_CASE("convert_episode reproduces the worked box_to_prompt example") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm", 0.5f);
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", true));

    const auto prompts = data::convert_episode(data::load_manifest(t.write_manifest(j)));
    REQUIRE(prompts.size() == 1);
    REQUIRE(prompts[0].position.x == 0.0);
    REQUIRE(prompts[0].position.y == 0.0);
    REQUIRE(prompts[0].position.z == 0.5);
    REQUIRE(prompts[0].orientation.w == 1.0);
    REQUIRE(prompts[0].gripper_width == Catch::Approx(0.05));
    REQUIRE(prompts[0].confidence == 0.9);
}

TEST_CASE("depth_scale rescales converted prompts") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm", 0.5f);
    json j = base_manifest();
    j["depth_scale"] = 2.0;
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", true));

    const auto prompts = data::convert_episode(data::load_manifest(t.write_manifest(j)));
    REQUIRE(prompts[0].position.z == Catch::Approx(1.0));
    REQUIRE(prompts[0].gripper_width == Catch::Approx(0.1));
}

TEST_CASE("all-NaN depth fails conversion citing the frame") {
    TempDataset t;
    io::save_image(Image(8, 6, 0.5f), t.dir / "f0.ppm");
    io::save_depth(DepthMap(640, 480, std::numeric_limits<float>::quiet_NaN()),
                   t.dir / "f0.pfm");
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", true));

    REQUIRE_THROWS_WITH(data::convert_episode(data::load_manifest(t.write_manifest(j))),
                        Catch::Matchers::ContainsSubstring("frame 0"));
}

TEST_CASE("dataset index resolves episode paths") {
    TempDataset t;
    write_frame_files(t, "f0.ppm", "f0.pfm");
    json j = base_manifest();
    j["frames"].push_back(frame_entry("f0.ppm", "f0.pfm", false));
    t.write_manifest(j);

    const auto idx_path = t.dir / "index.json";
    {
        std::ofstream out(idx_path);
        out << json{{"schema_version", 1}, {"episodes", {"manifest.json"}}}.dump();
    }
    const auto episodes = data::load_index(idx_path);
    REQUIRE(episodes.size() == 1);
    REQUIRE(std::filesystem::exists(episodes[0]));
}

TEST_CASE("synthetic scenes are self-consistent") {
    RandomStream rng(77);
    const data::SceneConfig cfg;
    for (int i = 0; i < 50; ++i) {
        RandomStream r = rng.fork("scene" + std::to_string(i));
        const data::SyntheticScene scene = data::make_synthetic_scene(cfg, r);

        const geom::GraspPrompt rt =
            geom::box_to_prompt(scene.nominal_box, scene.depth, scene.intrinsics);
        REQUIRE(std::abs(rt.position.x - scene.object_pose.position.x) < 1e-6);
        REQUIRE(std::abs(rt.position.y - scene.object_pose.position.y) < 1e-6);
        REQUIRE(std::abs(rt.position.z - scene.object_pose.position.z) < 1e-6);
        REQUIRE(std::abs(rt.gripper_width - scene.object_pose.gripper_width) < 1e-6);
        REQUIRE(geom::quaternion_angle(rt.orientation, scene.object_pose.orientation) < 1e-9);
        REQUIRE(scene.image.valid());
        REQUIRE(scene.depth.valid());
    }
}

TEST_CASE("oracle detector returns the nominal box exactly at the reference") {
    RandomStream rng(78);
    RandomStream scene_rng = rng.fork("scene");
    const data::SyntheticScene scene =
        data::make_synthetic_scene(data::SceneConfig{}, scene_rng);

    data::DetectorNoiseConfig cfg;
    cfg.sigma_px = 0.0;
    cfg.miss_base = 0.0;
    RandomStream det_rng = rng.fork("det");
    const auto box = data::oracle_detector(scene, cfg.reference_ms, cfg, det_rng);
    REQUIRE(box.has_value());
    REQUIRE(box->x == scene.nominal_box.x);
    REQUIRE(box->y == scene.nominal_box.y);
    REQUIRE(box->theta == scene.nominal_box.theta);
    REQUIRE(box->confidence == 1.0);
}

TEST_CASE("oracle detector is deterministic under a fixed stream") {
    RandomStream rng(79);
    RandomStream scene_rng = rng.fork("scene");
    const data::SyntheticScene scene =
        data::make_synthetic_scene(data::SceneConfig{}, scene_rng);
    data::DetectorNoiseConfig cfg;
    cfg.pos_growth_px = 2.0;
    cfg.miss_growth = 0.2;

    RandomStream r1 = rng.fork("trial");
    RandomStream r2 = rng.fork("trial");
    const auto a = data::oracle_detector(scene, 20.0, cfg, r1);
    const auto b = data::oracle_detector(scene, 20.0, cfg, r2);
    REQUIRE(a.has_value() == b.has_value());
    if (a.has_value()) {
        REQUIRE(a->x == b->x);
        REQUIRE(a->y == b->y);
        REQUIRE(a->theta == b->theta);
    }
}

TEST_CASE("oracle miss rate matches the configured curve at 10 ms") {
    RandomStream rng(80);
    RandomStream scene_rng = rng.fork("scene");
    const data::SyntheticScene scene =
        data::make_synthetic_scene(data::SceneConfig{}, scene_rng);

    data::DetectorNoiseConfig cfg;
    cfg.miss_base = 0.0;
    // Calibrated so the miss rate is 0.5 at 10 ms for a 100 ms reference.
    cfg.miss_growth = 0.5 / std::log(10.0);

    int misses = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        RandomStream r = rng.fork("t" + std::to_string(i));
        if (!data::oracle_detector(scene, 10.0, cfg, r).has_value()) ++misses;
    }
    const double rate = static_cast<double>(misses) / n;
    REQUIRE(std::abs(rate - 0.5) < 0.02);

    // And no misses at the reference.
    for (int i = 0; i < 1000; ++i) {
        RandomStream r = rng.fork("ref" + std::to_string(i));
        REQUIRE(data::oracle_detector(scene, 100.0, cfg, r).has_value());
    }
}

TEST_CASE("oracle noise is symmetric on the log-exposure axis") {
    data::DetectorNoiseConfig cfg;
    for (double ratio : {1.5, 2.0, 5.0, 17.0}) {
        REQUIRE(cfg.position_sigma(cfg.reference_ms * ratio) ==
                Catch::Approx(cfg.position_sigma(cfg.reference_ms / ratio)));
        REQUIRE(cfg.miss_rate(cfg.reference_ms * ratio) ==
                Catch::Approx(cfg.miss_rate(cfg.reference_ms / ratio)));
    }
}
