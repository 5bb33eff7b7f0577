#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"
#include "graspkit/core/linalg.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/io/tensor_file.hpp"
#include "graspkit/policy/diffusion.hpp"

namespace graspkit::policy {

inline constexpr int kTimestepEmbedDim = 8;

// Sinusoidal embedding of the normalized step tau = t/T: (sin, cos) pairs
// at frequencies 1/4, 1/2, 1 and 2 cycles over the step range. The lowest
// band is monotone in tau, which lets the first layer gate cleanly on the
// diffusion step.
inline la::Vec timestep_embedding(int t, int T) {
    if (T < 1) throw UsageError("timestep_embedding: T must be >= 1");
    const double tau = static_cast<double>(t) / static_cast<double>(T);
    const double two_pi = 6.28318530717958647692;
    la::Vec e;
    e.reserve(kTimestepEmbedDim);
    for (double f : {0.25, 0.5, 1.0, 2.0}) {
        e.push_back(std::sin(two_pi * f * tau));
        e.push_back(std::cos(two_pi * f * tau));
    }
    return e;
}

struct DenoiserConfig {
    int horizon = 8;
    int dims = 8;
    int cond_dim = 256; // conditioning vector length (2*D from the encoder)
    int hidden = 64;    // H

    int input_dim() const { return horizon * dims + kTimestepEmbedDim + cond_dim; }
    int output_dim() const { return horizon * dims; }

    void validate() const {
        if (horizon < 1 || dims < 1 || cond_dim < 0 || hidden < 1) {
            throw UsageError("DenoiserConfig: dimensions out of range");
        }
    }
};

// Conditioned noise predictor: two affine layers with an elementwise tanh,
// input = [flattened noisy trajectory | timestep embedding | conditioning].
struct DenoiserParams {
    DenoiserConfig cfg;
    la::Mat w1; // H x input_dim
    la::Vec b1; // H
    la::Mat w2; // output_dim x H
    la::Vec b2; // output_dim

    std::vector<std::span<double>> param_views() {
        return {std::span<double>(w1.v), std::span<double>(b1), std::span<double>(w2.v),
                std::span<double>(b2)};
    }
};

inline DenoiserParams init_denoiser_params(const DenoiserConfig& cfg, RandomStream& rng) {
    cfg.validate();
    DenoiserParams p;
    p.cfg = cfg;
    p.w1 = la::Mat(cfg.hidden, cfg.input_dim());
    p.b1 = la::Vec(static_cast<std::size_t>(cfg.hidden), 0.0);
    p.w2 = la::Mat(cfg.output_dim(), cfg.hidden);
    p.b2 = la::Vec(static_cast<std::size_t>(cfg.output_dim()), 0.0);

    const double bound1 = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim()));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    la::fill_uniform(p.w1, bound1, rng);
    la::fill_uniform(p.b1, bound1, rng);
    la::fill_uniform(p.w2, bound2, rng);
    la::fill_uniform(p.b2, bound2, rng);
    return p;
}

namespace detail {

struct DenoiserTrace {
    la::Vec input;  // assembled input vector
    la::Vec hidden; // tanh activations
};

} // namespace detail

inline la::Vec denoiser_forward(const DenoiserParams& params, const ActionTrajectory& xt,
                                int t, int n_steps, const la::Vec& cond,
                                detail::DenoiserTrace* trace = nullptr) {
    const DenoiserConfig& cfg = params.cfg;
    if (xt.horizon != cfg.horizon || xt.dims != cfg.dims) {
        throw ShapeError("denoiser_forward: trajectory shape " + std::to_string(xt.horizon) +
                         "x" + std::to_string(xt.dims) + " does not match config " +
                         std::to_string(cfg.horizon) + "x" + std::to_string(cfg.dims));
    }
    la::check_size(cond, static_cast<std::size_t>(cfg.cond_dim), "denoiser conditioning");

    la::Vec input;
    input.reserve(static_cast<std::size_t>(cfg.input_dim()));
    input.insert(input.end(), xt.values.begin(), xt.values.end());
    const la::Vec embed = timestep_embedding(t, n_steps);
    input.insert(input.end(), embed.begin(), embed.end());
    input.insert(input.end(), cond.begin(), cond.end());

    la::Vec hidden = la::matvec(params.w1, input);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        hidden[i] = std::tanh(hidden[i] + params.b1[i]);
    }
    la::Vec out = la::matvec(params.w2, hidden);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.b2[i];

    if (trace) {
        trace->input = std::move(input);
        trace->hidden = std::move(hidden);
    }
    return out;
}

struct DenoiserGradients {
    la::Mat w1;
    la::Vec b1;
    la::Mat w2;
    la::Vec b2;

    explicit DenoiserGradients(const DenoiserConfig& cfg)
        : w1(cfg.hidden, cfg.input_dim()), b1(static_cast<std::size_t>(cfg.hidden), 0.0),
          w2(cfg.output_dim(), cfg.hidden),
          b2(static_cast<std::size_t>(cfg.output_dim()), 0.0) {}

    std::vector<std::span<double>> param_views() {
        return {std::span<double>(w1.v), std::span<double>(b1), std::span<double>(w2.v),
                std::span<double>(b2)};
    }
};

// Accumulate parameter gradients given d(loss)/d(output).
inline void denoiser_backward(const DenoiserParams& params, const detail::DenoiserTrace& trace,
                              const la::Vec& dout, DenoiserGradients& grads) {
    la::check_size(dout, static_cast<std::size_t>(params.cfg.output_dim()),
                   "denoiser_backward dout");

    la::add_outer(grads.w2, dout, trace.hidden);
    for (std::size_t i = 0; i < grads.b2.size(); ++i) grads.b2[i] += dout[i];

    la::Vec dhidden = la::matvec_t(params.w2, dout);
    for (std::size_t i = 0; i < dhidden.size(); ++i) {
        const double h = trace.hidden[i];
        dhidden[i] *= 1.0 - h * h; // tanh'
    }
    la::add_outer(grads.w1, dhidden, trace.input);
    for (std::size_t i = 0; i < grads.b1.size(); ++i) grads.b1[i] += dhidden[i];
}

inline void save_denoiser_params(const DenoiserParams& p, const std::filesystem::path& path,
                                 const NoiseSchedule& sched) {
    nlohmann::json config = {{"horizon", p.cfg.horizon}, {"dims", p.cfg.dims},
                             {"cond_dim", p.cfg.cond_dim}, {"hidden", p.cfg.hidden},
                             {"T", sched.T},               {"s", sched.s}};
    std::vector<io::NamedTensor> tensors;
    tensors.push_back({"w1", {p.w1.rows, p.w1.cols}, p.w1.v});
    tensors.push_back({"b1", {static_cast<int>(p.b1.size())}, p.b1});
    tensors.push_back({"w2", {p.w2.rows, p.w2.cols}, p.w2.v});
    tensors.push_back({"b2", {static_cast<int>(p.b2.size())}, p.b2});
    io::save_tensors(path, tensors, config);
}

struct LoadedDenoiser {
    DenoiserParams params;
    NoiseSchedule schedule;
};

inline LoadedDenoiser load_denoiser_params(const std::filesystem::path& path) {
    const io::TensorFile file = io::load_tensors(path);
    DenoiserConfig cfg;
    int T = 16;
    double s = 0.008;
    try {
        cfg.horizon = file.config.at("horizon").get<int>();
        cfg.dims = file.config.at("dims").get<int>();
        cfg.cond_dim = file.config.at("cond_dim").get<int>();
        cfg.hidden = file.config.at("hidden").get<int>();
        T = file.config.at("T").get<int>();
        s = file.config.at("s").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("denoiser params " + path.string() + ": " + e.what());
    }
    cfg.validate();

    LoadedDenoiser out{DenoiserParams{}, build_schedule(T, s)};
    out.params.cfg = cfg;
    auto mat = [&](const std::string& name, int rows, int cols) {
        const io::NamedTensor& t = file.get(name);
        if (t.shape != std::vector<int>{rows, cols}) {
            throw FormatError("denoiser params: tensor \"" + name + "\" has wrong shape");
        }
        la::Mat m(rows, cols);
        m.v = t.data;
        return m;
    };
    out.params.w1 = mat("w1", cfg.hidden, cfg.input_dim());
    out.params.b1 = file.get("b1").data;
    la::check_size(out.params.b1, static_cast<std::size_t>(cfg.hidden), "denoiser b1");
    out.params.w2 = mat("w2", cfg.output_dim(), cfg.hidden);
    out.params.b2 = file.get("b2").data;
    la::check_size(out.params.b2, static_cast<std::size_t>(cfg.output_dim()), "denoiser b2");
    return out;
}

} // namespace graspkit::policy
