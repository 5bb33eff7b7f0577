#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/augment/primitives.hpp"
#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/core/random.hpp"

namespace graspkit::aug {

struct OpSpec {
    Primitive op;
    double min_severity = 0.0;
    double max_severity = 1.0;
};

// Parameters of the chain/mixture augmentation: k chains (or k sequential
// steps), Dirichlet concentration alpha for the mixing weights, gate
// threshold beta selecting the sequential branch, and blend factor lambda.
struct AugFusionConfig {
    int k = 3;
    double alpha = 1.0;
    double beta = 0.3;
    double lambda = 0.7;
    std::vector<OpSpec> op_set;

    void validate() const {
        if (k < 1) throw UsageError("AugFusionConfig: k must be >= 1");
        if (!(alpha > 0.0)) throw UsageError("AugFusionConfig: alpha must be > 0");
        if (!(beta >= 0.0 && beta <= 1.0)) {
            throw UsageError("AugFusionConfig: beta must lie in [0,1]");
        }
        if (!(lambda >= 0.0 && lambda <= 1.0)) {
            throw UsageError("AugFusionConfig: lambda must lie in [0,1]");
        }
        if (op_set.empty()) throw UsageError("AugFusionConfig: op_set must be non-empty");
        for (const OpSpec& s : op_set) {
            if (!(s.min_severity >= 0.0 && s.min_severity <= s.max_severity &&
                  s.max_severity <= 1.0)) {
                throw UsageError("AugFusionConfig: severity range of \"" +
                                 primitive_name(s.op) + "\" must satisfy 0 <= min <= max <= 1");
            }
        }
    }
};

inline std::vector<OpSpec> default_op_set() {
    return {
        {Primitive::Brightness, 0.1, 0.8},
        {Primitive::Contrast, 0.1, 0.8},
        {Primitive::Gamma, 0.1, 0.8},
        {Primitive::ExposureGain, 0.1, 0.8},
        {Primitive::GaussianBlur, 0.1, 0.6},
        {Primitive::GaussianNoise, 0.1, 0.5},
        {Primitive::SaturationShift, 0.1, 0.9},
    };
}

inline AugFusionConfig default_config() {
    AugFusionConfig cfg;
    cfg.op_set = default_op_set();
    return cfg;
}

inline AugFusionConfig config_from_json(const nlohmann::json& j) {
    AugFusionConfig cfg;
    try {
        cfg.k = j.at("k").get<int>();
        cfg.alpha = j.at("alpha").get<double>();
        cfg.beta = j.at("beta").get<double>();
        cfg.lambda = j.at("lambda").get<double>();
        if (j.contains("ops")) {
            for (const auto& e : j.at("ops")) {
                OpSpec s;
                s.op = primitive_from_name(e.at("name").get<std::string>());
                s.min_severity = e.value("min_severity", 0.0);
                s.max_severity = e.value("max_severity", 1.0);
                cfg.op_set.push_back(s);
            }
        } else {
            cfg.op_set = default_op_set();
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("augmentation config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline nlohmann::json config_to_json(const AugFusionConfig& cfg) {
    nlohmann::json ops = nlohmann::json::array();
    for (const OpSpec& s : cfg.op_set) {
        ops.push_back({{"name", primitive_name(s.op)},
                       {"min_severity", s.min_severity},
                       {"max_severity", s.max_severity}});
    }
    return {{"schema_version", 1}, {"k", cfg.k},      {"alpha", cfg.alpha},
            {"beta", cfg.beta},    {"lambda", cfg.lambda}, {"ops", ops}};
}

// Point on the probability simplex: k non-negative weights summing to one.
struct MixWeights {
    std::vector<double> weights;
};

namespace detail {

// Marsaglia-Tsang gamma sampler; for shape < 1 uses the boost
// Gamma(a) = Gamma(a+1) * U^(1/a).
inline double sample_gamma(double shape, RandomStream& rng) {
    if (shape < 1.0) {
        const double u = std::max(rng.next_double(), 0x1.0p-53);
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = std::max(rng.next_double(), 0x1.0p-53);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

} // namespace detail

// Symmetric Dirichlet(alpha, ..., alpha) via normalized gamma draws.
inline MixWeights sample_dirichlet(double alpha, int k, RandomStream& rng) {
    if (!(alpha > 0.0)) throw UsageError("sample_dirichlet: alpha must be > 0");
    if (k < 1) throw UsageError("sample_dirichlet: k must be >= 1");

    MixWeights w;
    w.weights.resize(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double& x : w.weights) {
        x = detail::sample_gamma(alpha, rng);
        sum += x;
    }
    if (sum <= 0.0) {
        // All gammas underflowed (possible only for extreme alpha); fall
        // back to the uniform point of the simplex.
        for (double& x : w.weights) x = 1.0 / k;
    } else {
        for (double& x : w.weights) x /= sum;
    }
    return w;
}

namespace detail {

inline const OpSpec& pick_op(const AugFusionConfig& cfg, RandomStream& rng) {
    return cfg.op_set[static_cast<std::size_t>(rng.next_below(cfg.op_set.size()))];
}

inline Image apply_random_primitive(const Image& img, const AugFusionConfig& cfg,
                                    RandomStream& rng) {
    const OpSpec& spec = pick_op(cfg, rng);
    const double severity = rng.next_uniform(spec.min_severity, spec.max_severity);
    return apply_primitive(img, spec.op, severity, rng);
}

} // namespace detail

// Chain/mixture augmentation over one image. Draw order is pinned so the
// result is fully determined by (image, cfg, rng):
//   1. gate variable xi ~ U[0,1)
//   2. mixing weights w ~ Dirichlet(alpha) of length k (both branches)
//   3a. xi <  beta: lambda is forced to 1 and one sequential chain of k
//       randomly drawn primitives is applied
//   3b. xi >= beta: k chains, chain i of random length L_i in {1..k}, each
//       applied to the original image; the branch output is the convex
//       mixture sum_i w_i * chain_i(x)
//   4. y = lambda * branch + (1 - lambda) * x, clamped to [0,1]
inline Image augfusion(const Image& img, const AugFusionConfig& cfg, RandomStream& rng) {
    cfg.validate();

    const double xi = rng.next_double();
    const MixWeights w = sample_dirichlet(cfg.alpha, cfg.k, rng);

    const bool sequential = xi < cfg.beta;
    const double lambda = sequential ? 1.0 : cfg.lambda;

    Image branch(img.width(), img.height());
    if (sequential) {
        branch = img;
        for (int i = 0; i < cfg.k; ++i) {
            branch = detail::apply_random_primitive(branch, cfg, rng);
        }
    } else {
        for (int i = 0; i < cfg.k; ++i) {
            const int chain_len = 1 + static_cast<int>(rng.next_below(
                                          static_cast<std::uint64_t>(cfg.k)));
            Image chained = img;
            for (int j = 0; j < chain_len; ++j) {
                chained = detail::apply_random_primitive(chained, cfg, rng);
            }
            const float wi = static_cast<float>(w.weights[static_cast<std::size_t>(i)]);
            for (std::size_t p = 0; p < branch.pixels().size(); ++p) {
                branch.pixels()[p] += wi * chained.pixels()[p];
            }
        }
    }

    Image out = img;
    const float lam = static_cast<float>(lambda);
    for (std::size_t p = 0; p < out.pixels().size(); ++p) {
        out.pixels()[p] = clamp01(lam * branch.pixels()[p] + (1.0f - lam) * img.pixels()[p]);
    }
    return out;
}

} // namespace graspkit::aug
