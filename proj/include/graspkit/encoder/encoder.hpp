#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"
#include "graspkit/core/linalg.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/data/manifest.hpp"
#include "graspkit/geom/grasp.hpp"
#include "graspkit/io/tensor_file.hpp"

namespace graspkit::enc {

// Per-timestep fused feature layout (length F):
//   [ visual (V) | ee position (3) | ee quaternion (4) | gripper (1)
//   | prompt position (3) | prompt quaternion (4) | width (1) | confidence (1)
//   | prompt presence flag (1) | task embedding (P) ]
// An absent grasp prompt contributes zeros with presence flag 0.
struct EncoderConfig {
    int visual_dim = 32;
    int task_dim = 16;  // P
    int token_dim = 128; // D

    int feature_length() const { return visual_dim + 8 + 10 + task_dim; }

    void validate() const {
        if (visual_dim < 0 || task_dim < 1 || token_dim < 1) {
            throw UsageError("EncoderConfig: dimensions out of range");
        }
    }
};

struct ObservationToken {
    la::Vec values;
};

// Deterministic task prompt embeddings drawn once per registered id.
class TaskPromptVocabulary {
public:
    TaskPromptVocabulary(int dim, std::uint64_t seed)
        : dim_(dim), root_(RandomStream(seed).fork("task_vocab")) {
        if (dim < 1) throw UsageError("TaskPromptVocabulary: dim must be >= 1");
    }

    const la::Vec& register_prompt(const std::string& id) {
        auto it = table_.find(id);
        if (it != table_.end()) return it->second;
        RandomStream rng = root_.fork(id);
        la::Vec v(static_cast<std::size_t>(dim_));
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
        for (double& x : v) x = scale * rng.next_gaussian();
        return table_.emplace(id, std::move(v)).first->second;
    }

    const la::Vec& lookup(const std::string& id) const {
        auto it = table_.find(id);
        if (it == table_.end()) {
            throw UsageError("task prompt \"" + id + "\" is not registered");
        }
        return it->second;
    }

    int dim() const { return dim_; }

private:
    int dim_;
    RandomStream root_;
    std::map<std::string, la::Vec> table_;
};

inline la::Vec assemble_features(const EncoderConfig& cfg, const la::Vec& visual,
                                 const data::RobotState& state,
                                 const std::optional<geom::GraspPrompt>& prompt,
                                 const la::Vec& task_embedding) {
    cfg.validate();
    la::check_size(visual, static_cast<std::size_t>(cfg.visual_dim), "visual features");
    la::check_size(task_embedding, static_cast<std::size_t>(cfg.task_dim), "task embedding");

    la::Vec f;
    f.reserve(static_cast<std::size_t>(cfg.feature_length()));
    f.insert(f.end(), visual.begin(), visual.end());

    f.push_back(state.ee_position.x);
    f.push_back(state.ee_position.y);
    f.push_back(state.ee_position.z);
    f.push_back(state.ee_orientation.x);
    f.push_back(state.ee_orientation.y);
    f.push_back(state.ee_orientation.z);
    f.push_back(state.ee_orientation.w);
    f.push_back(state.gripper_status);

    if (prompt.has_value()) {
        f.push_back(prompt->position.x);
        f.push_back(prompt->position.y);
        f.push_back(prompt->position.z);
        f.push_back(prompt->orientation.x);
        f.push_back(prompt->orientation.y);
        f.push_back(prompt->orientation.z);
        f.push_back(prompt->orientation.w);
        f.push_back(prompt->gripper_width);
        f.push_back(prompt->confidence);
        f.push_back(1.0);
    } else {
        for (int i = 0; i < 9; ++i) f.push_back(0.0);
        f.push_back(0.0);
    }

    f.insert(f.end(), task_embedding.begin(), task_embedding.end());
    return f;
}

// Token projection plus one single-head self-attention block over a window
// of two tokens.
struct EncoderParams {
    EncoderConfig cfg;
    la::Mat projection; // D x F
    la::Vec bias;       // D
    la::Mat wq, wk, wv, wo; // D x D

    // Fixed parameter order shared by serialization and gradient checks.
    std::vector<std::span<double>> param_views() {
        return {std::span<double>(projection.v), std::span<double>(bias),
                std::span<double>(wq.v), std::span<double>(wk.v),
                std::span<double>(wv.v), std::span<double>(wo.v)};
    }
};

inline EncoderParams init_encoder_params(const EncoderConfig& cfg, RandomStream& rng) {
    cfg.validate();
    const int d = cfg.token_dim;
    const int f = cfg.feature_length();
    EncoderParams p;
    p.cfg = cfg;
    p.projection = la::Mat(d, f);
    p.bias = la::Vec(static_cast<std::size_t>(d), 0.0);
    p.wq = la::Mat(d, d);
    p.wk = la::Mat(d, d);
    p.wv = la::Mat(d, d);
    p.wo = la::Mat(d, d);

    const double bound_f = 1.0 / std::sqrt(static_cast<double>(f));
    const double bound_d = 1.0 / std::sqrt(static_cast<double>(d));
    la::fill_uniform(p.projection, bound_f, rng);
    la::fill_uniform(p.bias, bound_f, rng);
    la::fill_uniform(p.wq, bound_d, rng);
    la::fill_uniform(p.wk, bound_d, rng);
    la::fill_uniform(p.wv, bound_d, rng);
    la::fill_uniform(p.wo, bound_d, rng);
    return p;
}

inline ObservationToken project_token(const EncoderParams& params, const la::Vec& features) {
    la::check_size(features, static_cast<std::size_t>(params.cfg.feature_length()),
                   "project_token features");
    la::Vec t = la::matvec(params.projection, features);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += params.bias[i];
    return ObservationToken{std::move(t)};
}

namespace detail {

// Forward state of the attention block kept for the backward pass.
struct AttentionTrace {
    std::array<la::Vec, 2> q, k, v, z, o;
    std::array<std::array<double, 2>, 2> attn{}; // attn[i][j], rows sum to 1
};

inline la::Vec attention_forward(const EncoderParams& params,
                                 const std::array<ObservationToken, 2>& tokens,
                                 AttentionTrace* trace) {
    const int d = params.cfg.token_dim;
    for (const auto& t : tokens) {
        la::check_size(t.values, static_cast<std::size_t>(d), "attention token");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    AttentionTrace local;
    AttentionTrace& tr = trace ? *trace : local;
    for (int i = 0; i < 2; ++i) {
        tr.q[i] = la::matvec(params.wq, tokens[static_cast<std::size_t>(i)].values);
        tr.k[i] = la::matvec(params.wk, tokens[static_cast<std::size_t>(i)].values);
        tr.v[i] = la::matvec(params.wv, tokens[static_cast<std::size_t>(i)].values);
    }
    for (int i = 0; i < 2; ++i) {
        double s[2];
        for (int j = 0; j < 2; ++j) s[j] = scale * la::dot(tr.q[i], tr.k[j]);
        const double m = std::max(s[0], s[1]);
        const double e0 = std::exp(s[0] - m);
        const double e1 = std::exp(s[1] - m);
        tr.attn[static_cast<std::size_t>(i)][0] = e0 / (e0 + e1);
        tr.attn[static_cast<std::size_t>(i)][1] = e1 / (e0 + e1);

        tr.z[i] = la::Vec(static_cast<std::size_t>(d), 0.0);
        for (int j = 0; j < 2; ++j) {
            la::axpy(tr.attn[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                     tr.v[j], tr.z[i]);
        }
        tr.o[i] = la::matvec(params.wo, tr.z[i]);
    }

    la::Vec out;
    out.reserve(static_cast<std::size_t>(2 * d));
    out.insert(out.end(), tr.o[0].begin(), tr.o[0].end());
    out.insert(out.end(), tr.o[1].begin(), tr.o[1].end());
    return out;
}

} // namespace detail

// Scaled dot-product self-attention over exactly two tokens; the two
// attended outputs are concatenated into the 2*D policy conditioning.
inline la::Vec attend_window(const EncoderParams& params,
                             const std::array<ObservationToken, 2>& tokens) {
    return detail::attention_forward(params, tokens, nullptr);
}

// Conditioning for the latest timestep of a token history: the window is
// (previous, current); at episode start the first token is repeated.
inline la::Vec window_conditioning(const EncoderParams& params,
                                   const std::vector<ObservationToken>& history) {
    if (history.empty()) {
        throw UsageError("window_conditioning: history must be non-empty");
    }
    const ObservationToken& current = history.back();
    const ObservationToken& previous =
        history.size() >= 2 ? history[history.size() - 2] : history.front();
    return attend_window(params, {previous, current});
}

struct EncoderGradients {
    la::Mat projection;
    la::Vec bias;
    la::Mat wq, wk, wv, wo;

    explicit EncoderGradients(const EncoderConfig& cfg)
        : projection(cfg.token_dim, cfg.feature_length()),
          bias(static_cast<std::size_t>(cfg.token_dim), 0.0),
          wq(cfg.token_dim, cfg.token_dim), wk(cfg.token_dim, cfg.token_dim),
          wv(cfg.token_dim, cfg.token_dim), wo(cfg.token_dim, cfg.token_dim) {}

    std::vector<std::span<double>> param_views() {
        return {std::span<double>(projection.v), std::span<double>(bias),
                std::span<double>(wq.v), std::span<double>(wk.v),
                std::span<double>(wv.v), std::span<double>(wo.v)};
    }
};

// Full forward pass (features -> tokens -> attention) with squared-error
// loss 0.5 * ||out - target||^2, returning the loss and accumulating
// analytic gradients for every parameter.
inline double encoder_loss_and_gradients(const EncoderParams& params, const la::Vec& f0,
                                         const la::Vec& f1, const la::Vec& target,
                                         EncoderGradients& grads) {
    const int d = params.cfg.token_dim;
    la::check_size(target, static_cast<std::size_t>(2 * d), "encoder target");

    const std::array<ObservationToken, 2> tokens{project_token(params, f0),
                                                 project_token(params, f1)};
    detail::AttentionTrace tr;
    const la::Vec out = detail::attention_forward(params, tokens, &tr);

    double loss = 0.0;
    la::Vec dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = out[i] - target[i];
        loss += 0.5 * r * r;
        dout[i] = r;
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::array<la::Vec, 2> dtok;
    for (auto& v : dtok) v = la::Vec(static_cast<std::size_t>(d), 0.0);
    std::array<la::Vec, 2> dv;
    for (auto& v : dv) v = la::Vec(static_cast<std::size_t>(d), 0.0);
    std::array<la::Vec, 2> dk;
    for (auto& v : dk) v = la::Vec(static_cast<std::size_t>(d), 0.0);

    for (int i = 0; i < 2; ++i) {
        const la::Vec doi(dout.begin() + i * d, dout.begin() + (i + 1) * d);
        la::add_outer(grads.wo, doi, tr.z[i]);
        const la::Vec dz = la::matvec_t(params.wo, doi);

        double da[2];
        for (int j = 0; j < 2; ++j) {
            da[j] = la::dot(dz, tr.v[j]);
            la::axpy(tr.attn[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], dz,
                     dv[j]);
        }
        const double a0 = tr.attn[static_cast<std::size_t>(i)][0];
        const double a1 = tr.attn[static_cast<std::size_t>(i)][1];
        const double mean = a0 * da[0] + a1 * da[1];
        const double ds[2] = {a0 * (da[0] - mean), a1 * (da[1] - mean)};

        la::Vec dq(static_cast<std::size_t>(d), 0.0);
        for (int j = 0; j < 2; ++j) {
            la::axpy(scale * ds[j], tr.k[j], dq);
            la::axpy(scale * ds[j], tr.q[i], dk[j]);
        }
        la::add_outer(grads.wq, dq, tokens[static_cast<std::size_t>(i)].values);
        la::axpy(1.0, la::matvec_t(params.wq, dq), dtok[i]);
    }
    for (int j = 0; j < 2; ++j) {
        la::add_outer(grads.wk, dk[j], tokens[static_cast<std::size_t>(j)].values);
        la::add_outer(grads.wv, dv[j], tokens[static_cast<std::size_t>(j)].values);
        la::axpy(1.0, la::matvec_t(params.wk, dk[j]), dtok[j]);
        la::axpy(1.0, la::matvec_t(params.wv, dv[j]), dtok[j]);
    }

    const la::Vec* feats[2] = {&f0, &f1};
    for (int i = 0; i < 2; ++i) {
        la::add_outer(grads.projection, dtok[i], *feats[i]);
        for (std::size_t r = 0; r < grads.bias.size(); ++r) grads.bias[r] += dtok[i][r];
    }
    return loss;
}

// Parameter file layout shared with the action head.
inline void save_encoder_params(const EncoderParams& p, const std::filesystem::path& path) {
    nlohmann::json config = {{"visual_dim", p.cfg.visual_dim},
                             {"task_dim", p.cfg.task_dim},
                             {"token_dim", p.cfg.token_dim},
                             {"feature_length", p.cfg.feature_length()}};
    std::vector<io::NamedTensor> tensors;
    tensors.push_back({"projection", {p.projection.rows, p.projection.cols}, p.projection.v});
    tensors.push_back({"bias", {static_cast<int>(p.bias.size())}, p.bias});
    tensors.push_back({"wq", {p.wq.rows, p.wq.cols}, p.wq.v});
    tensors.push_back({"wk", {p.wk.rows, p.wk.cols}, p.wk.v});
    tensors.push_back({"wv", {p.wv.rows, p.wv.cols}, p.wv.v});
    tensors.push_back({"wo", {p.wo.rows, p.wo.cols}, p.wo.v});
    io::save_tensors(path, tensors, config);
}

inline EncoderParams load_encoder_params(const std::filesystem::path& path) {
    const io::TensorFile file = io::load_tensors(path);
    EncoderConfig cfg;
    try {
        cfg.visual_dim = file.config.at("visual_dim").get<int>();
        cfg.task_dim = file.config.at("task_dim").get<int>();
        cfg.token_dim = file.config.at("token_dim").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("encoder params " + path.string() + ": " + e.what());
    }
    cfg.validate();

    EncoderParams p;
    p.cfg = cfg;
    auto mat = [&](const std::string& name, int rows, int cols) {
        const io::NamedTensor& t = file.get(name);
        if (t.shape != std::vector<int>{rows, cols}) {
            throw FormatError("encoder params: tensor \"" + name + "\" has wrong shape");
        }
        la::Mat m(rows, cols);
        m.v = t.data;
        return m;
    };
    const int d = cfg.token_dim;
    p.projection = mat("projection", d, cfg.feature_length());
    p.bias = file.get("bias").data;
    la::check_size(p.bias, static_cast<std::size_t>(d), "encoder bias");
    p.wq = mat("wq", d, d);
    p.wk = mat("wk", d, d);
    p.wv = mat("wv", d, d);
    p.wo = mat("wo", d, d);
    return p;
}

} // namespace graspkit::enc
