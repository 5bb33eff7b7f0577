#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"

namespace graspkit::policy {

// Cosine noise schedule:
//   f(t) = cos^2(((t/T + s) / (1 + s)) * pi/2)
//   beta_t = 1 - f(t)/f(t-1), clipped to at most 0.999
//   alpha_bar(t) = prod_{u<=t} (1 - beta_u)
// The clip keeps the final step away from the alpha_bar -> 0 singularity;
// alpha_bar is accumulated from the clipped betas so the two stay
// consistent. Away from the clip, alpha_bar(t) equals f(t)/f(0).
struct NoiseSchedule {
    int T = 16;
    double s = 0.008;
    std::vector<double> alpha_bar; // length T+1, alpha_bar[0] == 1
    std::vector<double> betas;     // length T
};

inline NoiseSchedule build_schedule(int T = 16, double s = 0.008) {
    if (T < 1) throw UsageError("build_schedule: T must be >= 1");
    if (!(s > 0.0)) throw UsageError("build_schedule: s must be > 0");

    const double pi = 3.14159265358979323846;
    auto f = [&](double t) {
        const double x = ((t / T + s) / (1.0 + s)) * pi / 2.0;
        const double c = std::cos(x);
        return c * c;
    };

    NoiseSchedule sched;
    sched.T = T;
    sched.s = s;
    sched.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
    sched.betas.resize(static_cast<std::size_t>(T));

    sched.alpha_bar[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double beta =
            std::min(1.0 - f(static_cast<double>(t)) / f(static_cast<double>(t - 1)), 0.999);
        sched.betas[static_cast<std::size_t>(t - 1)] = beta;
        sched.alpha_bar[static_cast<std::size_t>(t)] =
            sched.alpha_bar[static_cast<std::size_t>(t - 1)] * (1.0 - beta);
    }

    for (int t = 1; t <= T; ++t) {
        if (!(sched.alpha_bar[static_cast<std::size_t>(t)] <
              sched.alpha_bar[static_cast<std::size_t>(t - 1)])) {
            throw UsageError("build_schedule: alpha_bar is not strictly decreasing at t=" +
                             std::to_string(t));
        }
        if (!(sched.betas[static_cast<std::size_t>(t - 1)] > 0.0)) {
            throw UsageError("build_schedule: beta must be positive at t=" + std::to_string(t));
        }
    }
    return sched;
}

} // namespace graspkit::policy
