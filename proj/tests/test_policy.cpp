#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "graspkit/policy/denoiser.hpp"
#include "graspkit/policy/diffusion.hpp"
#include "graspkit/policy/gradcheck.hpp"
#include "graspkit/policy/schedule.hpp"
#include "graspkit/policy/train.hpp"

using graspkit::RandomStream;
using graspkit::ShapeError;
using graspkit::UsageError;
namespace la = graspkit::la;
namespace policy = graspkit::policy;

namespace {

la::Vec random_vec(std::size_t n, RandomStream& rng) {
    la::Vec v(n);
    for (double& x : v) x = rng.next_gaussian();
    return v;
}

policy::DenoiserConfig tiny_denoiser() {
    policy::DenoiserConfig cfg;
    cfg.horizon = 2;
    cfg.dims = 2;
    cfg.cond_dim = 3;
    cfg.hidden = 8;
    return cfg;
}

bool params_equal(policy::DenoiserParams& a, policy::DenoiserParams& b) {
    const auto va = a.param_views();
    const auto vb = b.param_views();
    if (va.size() != vb.size()) return false;
    for (std::size_t g = 0; g < va.size(); ++g) {
        if (va[g].size() != vb[g].size()) return false;
        if (std::memcmp(va[g].data(), vb[g].data(), va[g].size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("cosine schedule endpoints and midpoint") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    REQUIRE(s.alpha_bar[0] == 1.0);
    REQUIRE(s.alpha_bar[8] == Catch::Approx(0.4939).margin(1e-3));
    REQUIRE(s.alpha_bar[16] < 0.001);
}

TEST_CASE("schedule invariants hold for a range of shapes") {
    for (int T : {1, 4, 16, 64}) {
        const policy::NoiseSchedule s = policy::build_schedule(T, 0.008);
        REQUIRE(s.alpha_bar.size() == static_cast<std::size_t>(T) + 1);
        REQUIRE(s.betas.size() == static_cast<std::size_t>(T));
        for (int t = 1; t <= T; ++t) {
            REQUIRE(s.alpha_bar[t] < s.alpha_bar[t - 1]);
            REQUIRE(s.betas[t - 1] > 0.0);
            REQUIRE(s.betas[t - 1] <= 0.999);
        }
    }
    REQUIRE_THROWS_AS(policy::build_schedule(0, 0.008), UsageError);
    REQUIRE_THROWS_AS(policy::build_schedule(16, 0.0), UsageError);
}

TEST_CASE("forward diffusion at t=0 returns x0, and is linear in x0") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    RandomStream rng(1);
    policy::ActionTrajectory x0(2, 3);
    for (double& v : x0.values) v = rng.next_gaussian();
    const la::Vec noise = random_vec(x0.count(), rng);

    const policy::ActionTrajectory xt0 = policy::forward_diffuse(x0, 0, s, noise);
    REQUIRE(xt0.values == x0.values);

    policy::ActionTrajectory zero(2, 3);
    const policy::ActionTrajectory xt = policy::forward_diffuse(zero, 5, s, noise);
    const double spread = std::sqrt(1.0 - s.alpha_bar[5]);
    for (std::size_t i = 0; i < xt.values.size(); ++i) {
        REQUIRE(xt.values[i] == Catch::Approx(spread * noise[i]));
    }
}

TEST_CASE("forward diffusion variance matches 1 - alpha_bar") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    RandomStream rng(2);
    const policy::ActionTrajectory zero(1, 4);
    const int t = 9;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < 10000; ++i) {
        const la::Vec noise = random_vec(zero.count(), rng);
        const policy::ActionTrajectory xt = policy::forward_diffuse(zero, t, s, noise);
        for (double v : xt.values) {
            sum_sq += v * v;
            ++n;
        }
    }
    const double target = 1.0 - s.alpha_bar[t];
    REQUIRE(sum_sq / static_cast<double>(n) == Catch::Approx(target).epsilon(0.02));
}

TEST_CASE("ddim with the true noise inverts forward diffusion") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    RandomStream rng(3);
    policy::ActionTrajectory x0(2, 4);
    for (double& v : x0.values) v = rng.next_gaussian();
    const la::Vec noise = random_vec(x0.count(), rng);

    for (int t = 2; t <= 16; t += 7) {
        const policy::ActionTrajectory xt = policy::forward_diffuse(x0, t, s, noise);
        const int t_prev = t / 2;
        const policy::ActionTrajectory stepped = policy::ddim_step(xt, noise, t, t_prev, s);
        const policy::ActionTrajectory direct = policy::forward_diffuse(x0, t_prev, s, noise);
        for (std::size_t i = 0; i < stepped.values.size(); ++i) {
            REQUIRE(std::abs(stepped.values[i] - direct.values[i]) < 1e-9);
        }
    }

    // t_prev = 0 recovers x0 exactly.
    const policy::ActionTrajectory xt = policy::forward_diffuse(x0, 16, s, noise);
    const policy::ActionTrajectory rec = policy::ddim_step(xt, noise, 16, 0, s);
    for (std::size_t i = 0; i < rec.values.size(); ++i) {
        REQUIRE(std::abs(rec.values[i] - x0.values[i]) < 1e-9);
    }
}

TEST_CASE("ddim with zero noise prediction rescales by the alpha ratio") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    RandomStream rng(4);
    policy::ActionTrajectory xt(2, 2);
    for (double& v : xt.values) v = rng.next_gaussian();

    const policy::ActionTrajectory out =
        policy::ddim_step(xt, la::Vec(xt.count(), 0.0), 10, 6, s);
    const double ratio = std::sqrt(s.alpha_bar[6] / s.alpha_bar[10]);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        REQUIRE(out.values[i] == Catch::Approx(ratio * xt.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("ddim rejects bad step ordering") {
    const policy::NoiseSchedule s = policy::build_schedule(16, 0.008);
    const policy::ActionTrajectory xt(2, 2);
    const la::Vec eps(xt.count(), 0.0);
    REQUIRE_THROWS_AS(policy::ddim_step(xt, eps, 5, 5, s), UsageError);
    REQUIRE_THROWS_AS(policy::ddim_step(xt, eps, 5, 9, s), UsageError);
    REQUIRE_THROWS_AS(policy::ddim_step(xt, eps, 17, 3, s), UsageError);
}

TEST_CASE("zero denoiser parameters produce zero output") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    RandomStream rng(5);
    policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);
    for (auto view : p.param_views()) {
        std::fill(view.begin(), view.end(), 0.0);
    }
    policy::ActionTrajectory xt(cfg.horizon, cfg.dims);
    for (double& v : xt.values) v = rng.next_gaussian();
    const la::Vec out = policy::denoiser_forward(p, xt, 3, 16, random_vec(3, rng));
    for (double v : out) REQUIRE(v == 0.0);
}

TEST_CASE("denoiser forward is pure and finite") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    RandomStream rng(6);
    const policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);
    policy::ActionTrajectory xt(cfg.horizon, cfg.dims);
    for (double& v : xt.values) v = rng.next_gaussian();
    const la::Vec cond = random_vec(3, rng);

    const la::Vec a = policy::denoiser_forward(p, xt, 7, 16, cond);
    const la::Vec b = policy::denoiser_forward(p, xt, 7, 16, cond);
    REQUIRE(a == b);
    for (double v : a) REQUIRE(std::isfinite(v));

    policy::ActionTrajectory bad(cfg.horizon + 1, cfg.dims);
    REQUIRE_THROWS_AS(policy::denoiser_forward(p, bad, 7, 16, cond), ShapeError);
}

TEST_CASE("denoiser gradients match central finite differences") {
    const policy::DenoiserConfig cfg = tiny_denoiser(); // H = 8
    RandomStream rng(7);
    policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);
    policy::ActionTrajectory xt(cfg.horizon, cfg.dims);
    for (double& v : xt.values) v = rng.next_gaussian();
    const la::Vec cond = random_vec(3, rng);
    const la::Vec target = random_vec(xt.count(), rng);

    // Loss: RMSE between prediction and target, the training objective.
    const auto loss_and_grad = [&](policy::DenoiserGradients* grads) {
        policy::detail::DenoiserTrace trace;
        const la::Vec pred = policy::denoiser_forward(p, xt, 5, 16, cond, &trace);
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double r = pred[i] - target[i];
            sum_sq += r * r;
        }
        const double rmse = std::sqrt(sum_sq / static_cast<double>(pred.size()));
        if (grads) {
            la::Vec dout(pred.size());
            const double scale = 1.0 / (static_cast<double>(pred.size()) *
                                        std::max(rmse, policy::kRmseGuard));
            for (std::size_t i = 0; i < pred.size(); ++i) {
                dout[i] = (pred[i] - target[i]) * scale;
            }
            policy::denoiser_backward(p, trace, dout, *grads);
        }
        return rmse;
    };

    policy::DenoiserGradients grads(cfg);
    loss_and_grad(&grads);
    const double err = policy::finite_diff_check(
        [&]() { return loss_and_grad(nullptr); }, p.param_views(),
        policy::as_const_views(grads.param_views()), 1e-5);
    REQUIRE(err < 1e-4);
}

TEST_CASE("finite differences on a quadratic are near-exact") {
    // L(w) = 0.5 * sum (w_i - c_i)^2 has gradient w - c.
    la::Vec w = {0.4, -1.2, 2.0};
    const la::Vec c = {1.0, 0.5, -0.25};
    la::Vec grad(3);
    for (int i = 0; i < 3; ++i) grad[i] = w[i] - c[i];

    const auto loss = [&]() {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s += 0.5 * (w[i] - c[i]) * (w[i] - c[i]);
        return s;
    };
    const double err = policy::finite_diff_check(
        loss, {std::span<double>(w)}, {std::span<const double>(grad)}, 1e-5);
    REQUIRE(err < 1e-8);
}

TEST_CASE("training on a single zero trajectory drives RMSE below 0.05") {
    policy::DenoiserConfig cfg;
    cfg.horizon = 2;
    cfg.dims = 2;
    cfg.cond_dim = 2;
    cfg.hidden = 64;
    const policy::NoiseSchedule sched = policy::build_schedule(4, 0.008);

    std::vector<policy::TrainSample> dataset{{la::Vec(2, 0.0),
                                              policy::ActionTrajectory(2, 2, 0.0)}};
    policy::TrainConfig tc;
    tc.epochs = 150000;
    tc.batch_size = 1;
    tc.learning_rate = 0.002;
    tc.seed = 11;

    const policy::TrainResult result = policy::train_policy(dataset, cfg, sched, tc);
    REQUIRE(result.epoch_rmse.size() == 150000);
    REQUIRE(result.epoch_rmse.back() < 0.05);
}

TEST_CASE("training is deterministic byte for byte") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    RandomStream rng(8);
    std::vector<policy::TrainSample> dataset;
    for (int i = 0; i < 4; ++i) {
        policy::ActionTrajectory traj(cfg.horizon, cfg.dims);
        for (double& v : traj.values) v = rng.next_gaussian();
        dataset.push_back({random_vec(3, rng), traj});
    }
    policy::TrainConfig tc;
    tc.epochs = 20;
    tc.batch_size = 2;
    tc.learning_rate = 0.05;
    tc.seed = 3;

    policy::TrainResult a = policy::train_policy(dataset, cfg, sched, tc);
    policy::TrainResult b = policy::train_policy(dataset, cfg, sched, tc);
    REQUIRE(params_equal(a.params, b.params));
    REQUIRE(a.epoch_rmse == b.epoch_rmse);
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    std::vector<policy::TrainSample> dataset{{la::Vec(3, 0.0),
                                              policy::ActionTrajectory(2, 2, 0.5)}};
    policy::TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 1;
    tc.learning_rate = 0.0;
    tc.seed = 21;

    policy::TrainResult result = policy::train_policy(dataset, cfg, sched, tc);
    RandomStream init_rng = RandomStream(21).fork("init");
    policy::DenoiserParams fresh = policy::init_denoiser_params(cfg, init_rng);
    REQUIRE(params_equal(result.params, fresh));
}

TEST_CASE("empty dataset is a usage error") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    REQUIRE_THROWS_AS(policy::train_policy({}, cfg, sched, policy::TrainConfig{}), UsageError);
}

TEST_CASE("zero-parameter denoiser sampling telescopes to a rescaled draw") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    RandomStream rng(9);
    policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);
    for (auto view : p.param_views()) {
        std::fill(view.begin(), view.end(), 0.0);
    }
    const la::Vec cond = random_vec(3, rng);

    RandomStream s1 = rng.fork("sample");
    const policy::ActionTrajectory out = policy::sample_actions(p, cond, sched, s1);

    RandomStream s2 = rng.fork("sample");
    policy::ActionTrajectory xT(cfg.horizon, cfg.dims);
    for (double& v : xT.values) v = s2.next_gaussian();
    const double ratio = std::sqrt(sched.alpha_bar[0] / sched.alpha_bar[16]);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        REQUIRE(out.values[i] == Catch::Approx(ratio * xT.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("sampling is deterministic given (params, cond, stream)") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    RandomStream rng(10);
    const policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);
    const la::Vec cond = random_vec(3, rng);

    RandomStream s1 = rng.fork("draw");
    RandomStream s2 = rng.fork("draw");
    const policy::ActionTrajectory a = policy::sample_actions(p, cond, sched, s1);
    const policy::ActionTrajectory b = policy::sample_actions(p, cond, sched, s2);
    REQUIRE(a.values == b.values);
}

TEST_CASE("denoiser parameters round-trip with their schedule") {
    const policy::DenoiserConfig cfg = tiny_denoiser();
    const policy::NoiseSchedule sched = policy::build_schedule(16, 0.008);
    RandomStream rng(11);
    policy::DenoiserParams p = policy::init_denoiser_params(cfg, rng);

    const auto dir = std::filesystem::temp_directory_path() / "graspkit_pol_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "denoiser.bin";
    policy::save_denoiser_params(p, path, sched);
    policy::LoadedDenoiser back = policy::load_denoiser_params(path);

    REQUIRE(back.schedule.T == 16);
    REQUIRE(back.schedule.s == 0.008);
    REQUIRE(params_equal(back.params, p));
}

TEST_CASE("rmse is zero iff prediction equals noise") {
    // Direct property of the loss formula used in training.
    const la::Vec r0(8, 0.0);
    REQUIRE(policy::detail::batch_rmse(0.0, 8) == 0.0);
    double sum_sq = 0.0;
    for (double v : {0.1, -0.2, 0.3}) sum_sq += v * v;
    REQUIRE(policy::detail::batch_rmse(sum_sq, 3) > 0.0);
}
