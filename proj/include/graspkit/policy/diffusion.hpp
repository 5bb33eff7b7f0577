#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/linalg.hpp"
#include "graspkit/core/random.hpp"
#include "graspkit/policy/schedule.hpp"

namespace graspkit::policy {

// Action sequence over a fixed horizon: per step the end-effector position
// (3), orientation quaternion (4) and gripper opening (1) by default.
struct ActionTrajectory {
    int horizon = 8;
    int dims = 8;
    la::Vec values; // horizon * dims, row-major

    ActionTrajectory() : values(64, 0.0) {}
    ActionTrajectory(int horizon_, int dims_, double fill = 0.0)
        : horizon(horizon_), dims(dims_),
          values(static_cast<std::size_t>(check(horizon_, dims_)), fill) {}

    std::size_t count() const { return values.size(); }

    bool same_shape(const ActionTrajectory& o) const {
        return horizon == o.horizon && dims == o.dims;
    }

private:
    static int check(int h, int d) {
        if (h < 1 || d < 1) {
            throw UsageError("ActionTrajectory: horizon and dims must be positive");
        }
        return h * d;
    }
};

inline void check_step_range(int t, const NoiseSchedule& sched, const char* what) {
    if (t < 0 || t > sched.T) {
        throw UsageError(std::string(what) + ": step " + std::to_string(t) +
                         " outside [0, " + std::to_string(sched.T) + "]");
    }
}

// Forward marginal x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
inline ActionTrajectory forward_diffuse(const ActionTrajectory& x0, int t,
                                        const NoiseSchedule& sched, const la::Vec& noise) {
    check_step_range(t, sched, "forward_diffuse");
    la::check_size(noise, x0.count(), "forward_diffuse noise");

    const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double signal = std::sqrt(ab);
    const double spread = std::sqrt(1.0 - ab);

    ActionTrajectory xt = x0;
    for (std::size_t i = 0; i < xt.values.size(); ++i) {
        xt.values[i] = signal * x0.values[i] + spread * noise[i];
    }
    return xt;
}

// Deterministic DDIM update (eta = 0):
//   x0_hat   = (x_t - sqrt(1 - ab_t) eps_hat) / sqrt(ab_t)
//   x_{t'}   = sqrt(ab_{t'}) x0_hat + sqrt(1 - ab_{t'}) eps_hat
// At t' = 0 this returns x0_hat.
inline ActionTrajectory ddim_step(const ActionTrajectory& xt, const la::Vec& eps_pred, int t,
                                  int t_prev, const NoiseSchedule& sched) {
    check_step_range(t, sched, "ddim_step");
    check_step_range(t_prev, sched, "ddim_step");
    if (!(t_prev < t)) {
        throw UsageError("ddim_step: require t_prev < t, got t_prev=" +
                         std::to_string(t_prev) + " t=" + std::to_string(t));
    }
    la::check_size(eps_pred, xt.count(), "ddim_step eps_pred");

    const double ab_t = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double ab_p = sched.alpha_bar[static_cast<std::size_t>(t_prev)];
    const double signal_t = std::sqrt(ab_t);
    const double spread_t = std::sqrt(1.0 - ab_t);
    const double signal_p = std::sqrt(ab_p);
    const double spread_p = std::sqrt(1.0 - ab_p);

    ActionTrajectory out = xt;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double x0_hat = (xt.values[i] - spread_t * eps_pred[i]) / signal_t;
        out.values[i] = signal_p * x0_hat + spread_p * eps_pred[i];
    }
    return out;
}

} // namespace graspkit::policy
