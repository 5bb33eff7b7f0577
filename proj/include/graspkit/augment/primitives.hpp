#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/core/random.hpp"

// Photometric corruption primitives. Every primitive maps severity 0 to the
// identity (early return, pixel-exact) and clamps its output to [0, 1].
// Only gaussian_noise consumes the random stream.
//
// Severity mappings, severity s in [0, 1]:
//   brightness      additive shift  v + 0.35*s
//   contrast        blend toward mid-gray, factor 1 - 0.75*s
//   gamma           v^(1 + 1.5*s)
//   exposure_gain   linear-light gain 2^(-2.5*s)  (underexposure)
//   gaussian_blur   separable kernel, sigma = 3*s pixels, replicate border
//   gaussian_noise  additive N(0, (0.25*s)^2) per sample
//   saturation_shift  desaturate toward Rec.709 luma, factor 1 - s
namespace graspkit::aug {

enum class Primitive {
    Brightness,
    Contrast,
    Gamma,
    ExposureGain,
    GaussianBlur,
    GaussianNoise,
    SaturationShift,
};

inline const std::vector<std::pair<std::string, Primitive>>& primitive_names() {
    static const std::vector<std::pair<std::string, Primitive>> names = {
        {"brightness", Primitive::Brightness},
        {"contrast", Primitive::Contrast},
        {"gamma", Primitive::Gamma},
        {"exposure_gain", Primitive::ExposureGain},
        {"gaussian_blur", Primitive::GaussianBlur},
        {"gaussian_noise", Primitive::GaussianNoise},
        {"saturation_shift", Primitive::SaturationShift},
    };
    return names;
}

inline Primitive primitive_from_name(std::string_view name) {
    for (const auto& [n, p] : primitive_names()) {
        if (n == name) return p;
    }
    throw UsageError("unknown augmentation primitive \"" + std::string(name) + "\"");
}

inline const std::string& primitive_name(Primitive p) {
    for (const auto& [n, q] : primitive_names()) {
        if (q == p) return n;
    }
    throw UsageError("unknown augmentation primitive id");
}

namespace detail {

// De-gamma 2.2, apply linear gain, re-gamma. Double math for accuracy.
inline float linear_light_gain(float v, double gain) {
    const double lin = std::pow(static_cast<double>(v), 2.2) * gain;
    return clamp01(static_cast<float>(std::pow(lin, 1.0 / 2.2)));
}

inline Image gaussian_blur(const Image& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1) return img;

    std::vector<float> kernel(static_cast<std::size_t>(radius) * 2 + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double g = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = static_cast<float>(g);
        sum += g;
    }
    for (float& k : kernel) k = static_cast<float>(k / sum);

    const int w = img.width();
    const int h = img.height();
    Image tmp(w, h);
    Image out(w, h);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                float acc = 0.0f;
                for (int i = -radius; i <= radius; ++i) {
                    const int xi = std::clamp(x + i, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * img.at(xi, y, c);
                }
                tmp.at(x, y, c) = acc;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                float acc = 0.0f;
                for (int i = -radius; i <= radius; ++i) {
                    const int yi = std::clamp(y + i, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(x, yi, c);
                }
                out.at(x, y, c) = clamp01(acc);
            }
        }
    }
    return out;
}

} // namespace detail

inline Image apply_primitive(const Image& img, Primitive op, double severity,
                             RandomStream& rng) {
    if (!(severity >= 0.0 && severity <= 1.0)) {
        throw UsageError("apply_primitive: severity must lie in [0,1]");
    }
    if (severity == 0.0) return img;

    Image out = img;
    switch (op) {
        case Primitive::Brightness: {
            const float shift = static_cast<float>(0.35 * severity);
            for (float& v : out.pixels()) v = clamp01(v + shift);
            break;
        }
        case Primitive::Contrast: {
            const float f = static_cast<float>(1.0 - 0.75 * severity);
            for (float& v : out.pixels()) v = clamp01(0.5f + (v - 0.5f) * f);
            break;
        }
        case Primitive::Gamma: {
            const double g = 1.0 + 1.5 * severity;
            for (float& v : out.pixels()) {
                v = clamp01(static_cast<float>(std::pow(static_cast<double>(v), g)));
            }
            break;
        }
        case Primitive::ExposureGain: {
            const double gain = std::pow(2.0, -2.5 * severity);
            for (float& v : out.pixels()) v = detail::linear_light_gain(v, gain);
            break;
        }
        case Primitive::GaussianBlur:
            out = detail::gaussian_blur(img, 3.0 * severity);
            break;
        case Primitive::GaussianNoise: {
            const double sigma = 0.25 * severity;
            for (float& v : out.pixels()) {
                v = clamp01(v + static_cast<float>(sigma * rng.next_gaussian()));
            }
            break;
        }
        case Primitive::SaturationShift: {
            const float f = static_cast<float>(1.0 - severity);
            for (int y = 0; y < out.height(); ++y) {
                for (int x = 0; x < out.width(); ++x) {
                    const float luma = 0.2126f * out.at(x, y, 0) +
                                       0.7152f * out.at(x, y, 1) +
                                       0.0722f * out.at(x, y, 2);
                    for (int c = 0; c < 3; ++c) {
                        out.at(x, y, c) = clamp01(luma + (out.at(x, y, c) - luma) * f);
                    }
                }
            }
            break;
        }
    }
    return out;
}

} // namespace graspkit::aug
