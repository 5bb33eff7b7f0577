#pragma once

#include <cmath>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"

namespace graspkit::aug {

// The ten exposure levels of the robustness benchmark, in milliseconds.
inline std::vector<double> benchmark_exposure_levels() {
    return {10, 20, 40, 60, 80, 100, 120, 140, 160, 170};
}

// Camera exposure stand-in: the gain exposure_ms/reference_ms is applied in
// linear-light space (de-gamma 2.2, gain, re-gamma) and clamped. Monotone in
// exposure_ms per pixel.
inline Image simulate_exposure(const Image& img, double exposure_ms, double reference_ms) {
    if (!(exposure_ms > 0.0) || !std::isfinite(exposure_ms)) {
        throw UsageError("simulate_exposure: exposure_ms must be positive and finite");
    }
    if (!(reference_ms > 0.0) || !std::isfinite(reference_ms)) {
        throw UsageError("simulate_exposure: reference_ms must be positive and finite");
    }
    const double gain = exposure_ms / reference_ms;
    Image out = img;
    for (float& v : out.pixels()) {
        const double lin = std::pow(static_cast<double>(v), 2.2) * gain;
        v = clamp01(static_cast<float>(std::pow(lin, 1.0 / 2.2)));
    }
    return out;
}

} // namespace graspkit::aug
