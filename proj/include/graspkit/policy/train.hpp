#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/policy/denoiser.hpp"
#include "graspkit/policy/diffusion.hpp"
#include "graspkit/policy/schedule.hpp"

namespace graspkit::policy {

struct TrainSample {
    la::Vec conditioning;
    ActionTrajectory trajectory;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 16;
    double learning_rate = 0.02;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1 || batch_size < 1) {
            throw UsageError("TrainConfig: epochs and batch_size must be >= 1");
        }
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw UsageError("TrainConfig: learning_rate must be non-negative and finite");
        }
    }
};

struct TrainResult {
    DenoiserParams params;
    std::vector<double> epoch_rmse;
};

inline constexpr double kRmseGuard = 1e-12;

namespace detail {

// RMSE over a batch and its gradient contribution per residual element:
//   L = sqrt(mean(r^2)),  dL/dr_i = r_i / (n * max(L, guard)).
inline double batch_rmse(double sum_sq, std::size_t n) {
    return std::sqrt(sum_sq / static_cast<double>(n));
}

} // namespace detail

// Minibatch gradient descent on the batch RMSE between predicted and
// injected noise. Every epoch reshuffles the dataset and draws a fresh
// (step, noise) pair per sample from streams forked off the seed, so the
// whole run is reproducible bit for bit.
inline TrainResult train_policy(const std::vector<TrainSample>& dataset,
                                const DenoiserConfig& model_cfg, const NoiseSchedule& sched,
                                const TrainConfig& cfg) {
    if (dataset.empty()) {
        throw UsageError("train_policy: dataset must be non-empty");
    }
    cfg.validate();
    model_cfg.validate();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].trajectory.horizon != model_cfg.horizon ||
            dataset[i].trajectory.dims != model_cfg.dims) {
            throw ShapeError("train_policy: sample " + std::to_string(i) +
                             " trajectory shape mismatch");
        }
        la::check_size(dataset[i].conditioning, static_cast<std::size_t>(model_cfg.cond_dim),
                       "train_policy conditioning");
    }

    RandomStream root(cfg.seed);
    RandomStream init_rng = root.fork("init");
    TrainResult result{init_denoiser_params(model_cfg, init_rng), {}};
    result.epoch_rmse.reserve(static_cast<std::size_t>(cfg.epochs));

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        RandomStream ep = root.fork("epoch:" + std::to_string(epoch));

        RandomStream shuffle_rng = ep.fork("shuffle");
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss_sum = 0.0;
        int batches = 0;
        std::size_t pos = 0;
        int draw_index = 0;
        while (pos < order.size()) {
            const std::size_t batch_end = std::min(pos + static_cast<std::size_t>(cfg.batch_size),
                                                   order.size());

            struct Cached {
                detail::DenoiserTrace trace;
                la::Vec residual;
            };
            std::vector<Cached> cache;
            cache.reserve(batch_end - pos);

            double sum_sq = 0.0;
            std::size_t n_elems = 0;
            for (std::size_t b = pos; b < batch_end; ++b) {
                const TrainSample& sample = dataset[order[b]];
                RandomStream draw = ep.fork("draw:" + std::to_string(draw_index++));

                const int t = 1 + static_cast<int>(draw.next_below(
                                      static_cast<std::uint64_t>(sched.T)));
                la::Vec noise(sample.trajectory.count());
                for (double& x : noise) x = draw.next_gaussian();

                const ActionTrajectory xt = forward_diffuse(sample.trajectory, t, sched, noise);
                Cached c;
                const la::Vec pred = denoiser_forward(result.params, xt, t, sched.T,
                                                      sample.conditioning, &c.trace);
                c.residual.resize(pred.size());
                for (std::size_t i = 0; i < pred.size(); ++i) {
                    c.residual[i] = pred[i] - noise[i];
                    sum_sq += c.residual[i] * c.residual[i];
                }
                n_elems += pred.size();
                cache.push_back(std::move(c));
            }

            const double rmse = detail::batch_rmse(sum_sq, n_elems);
            epoch_loss_sum += rmse;
            ++batches;

            if (cfg.learning_rate > 0.0) {
                DenoiserGradients grads(model_cfg);
                const double scale = 1.0 / (static_cast<double>(n_elems) *
                                            std::max(rmse, kRmseGuard));
                for (Cached& c : cache) {
                    la::Vec dout = c.residual;
                    for (double& v : dout) v *= scale;
                    denoiser_backward(result.params, c.trace, dout, grads);
                }

                const auto params = result.params.param_views();
                auto grad_views = grads.param_views();
                for (std::size_t g = 0; g < params.size(); ++g) {
                    for (std::size_t i = 0; i < params[g].size(); ++i) {
                        params[g][i] -= cfg.learning_rate * grad_views[g][i];
                    }
                }
            }
            pos = batch_end;
        }
        result.epoch_rmse.push_back(epoch_loss_sum / batches);
    }
    return result;
}

// Draw x_T from the unit Gaussian and run the deterministic DDIM recursion
// down the full step sequence T, T-1, ..., 0.
inline ActionTrajectory sample_actions(const DenoiserParams& params, const la::Vec& cond,
                                       const NoiseSchedule& sched, RandomStream& rng) {
    ActionTrajectory x(params.cfg.horizon, params.cfg.dims);
    for (double& v : x.values) v = rng.next_gaussian();

    for (int t = sched.T; t >= 1; --t) {
        const la::Vec eps = denoiser_forward(params, x, t, sched.T, cond);
        x = ddim_step(x, eps, t, t - 1, sched);
    }
    return x;
}

} // namespace graspkit::policy
