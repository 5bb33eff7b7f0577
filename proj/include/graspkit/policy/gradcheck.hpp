#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "graspkit/core/error.hpp"

namespace graspkit::policy {

// Compare analytic gradients against central finite differences, parameter
// by parameter, over the views returned by a model's param_views(). The
// loss closure re-evaluates the model with the mutated parameters in place.
// Returns the worst relative error, with the denominator floored at 1e-6 so
// near-zero gradients compare absolutely.
inline double finite_diff_check(const std::function<double()>& loss,
                                std::vector<std::span<double>> params,
                                const std::vector<std::span<const double>>& analytic,
                                double step) {
    if (!(step > 0.0)) {
        throw UsageError("finite_diff_check: step must be positive");
    }
    if (params.size() != analytic.size()) {
        throw UsageError("finite_diff_check: parameter/gradient group count mismatch");
    }

    double worst = 0.0;
    for (std::size_t g = 0; g < params.size(); ++g) {
        if (params[g].size() != analytic[g].size()) {
            throw UsageError("finite_diff_check: group size mismatch");
        }
        for (std::size_t i = 0; i < params[g].size(); ++i) {
            const double saved = params[g][i];
            params[g][i] = saved + step;
            const double up = loss();
            params[g][i] = saved - step;
            const double down = loss();
            params[g][i] = saved;

            const double numeric = (up - down) / (2.0 * step);
            const double ana = analytic[g][i];
            const double denom = std::max({std::abs(numeric), std::abs(ana), 1e-6});
            worst = std::max(worst, std::abs(numeric - ana) / denom);
        }
    }
    return worst;
}

inline std::vector<std::span<const double>> as_const_views(
    std::vector<std::span<double>> views) {
    return std::vector<std::span<const double>>(views.begin(), views.end());
}

} // namespace graspkit::policy
