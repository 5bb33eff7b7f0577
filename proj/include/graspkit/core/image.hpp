#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"

namespace graspkit {

inline float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

// Dense RGB raster, row-major, three channels, values in [0, 1].
class Image {
public:
    Image() = default;

    Image(int width, int height, float fill = 0.0f)
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(check_dims(width, height)) * 3, fill) {}

    Image(int width, int height, std::vector<float> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        check_dims(width, height);
        if (pixels_.size() != static_cast<std::size_t>(width_) * height_ * 3) {
            throw UsageError("Image: pixel buffer size does not match " +
                             std::to_string(width_) + "x" + std::to_string(height_) + "x3");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    static constexpr int channels() { return 3; }

    float& at(int x, int y, int c) {
        return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }

    std::vector<float>& pixels() { return pixels_; }
    const std::vector<float>& pixels() const { return pixels_; }

    bool same_shape(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    void clamp() {
        for (float& v : pixels_) v = clamp01(v);
    }

    bool valid() const {
        for (float v : pixels_) {
            if (!(v >= 0.0f && v <= 1.0f)) return false; // rejects NaN too
        }
        return true;
    }

private:
    static int check_dims(int w, int h) {
        if (w <= 0 || h <= 0) {
            throw UsageError("Image: dimensions must be positive, got " +
                             std::to_string(w) + "x" + std::to_string(h));
        }
        return w * h;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> pixels_;
};

// Single-channel metric depth raster in meters. Invalid cells are NaN;
// valid cells are strictly positive and finite.
class DepthMap {
public:
    DepthMap() = default;

    DepthMap(int width, int height, float fill)
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(check_dims(width, height)), fill) {}

    DepthMap(int width, int height, std::vector<float> values)
        : width_(width), height_(height), values_(std::move(values)) {
        check_dims(width, height);
        if (values_.size() != static_cast<std::size_t>(width_) * height_) {
            throw UsageError("DepthMap: buffer size does not match " +
                             std::to_string(width_) + "x" + std::to_string(height_));
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }

    float& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

    std::vector<float>& values() { return values_; }
    const std::vector<float>& values() const { return values_; }

    // NaN cells stay NaN; valid cells are multiplied by s.
    DepthMap scaled(float s) const {
        if (!(s > 0.0f)) {
            throw UsageError("DepthMap::scaled: scale must be positive");
        }
        DepthMap out = *this;
        for (float& v : out.values_) {
            if (!std::isnan(v)) v *= s;
        }
        return out;
    }

    bool valid() const {
        for (float v : values_) {
            if (std::isnan(v)) continue;
            if (!(v > 0.0f) || std::isinf(v)) return false;
        }
        return true;
    }

private:
    static int check_dims(int w, int h) {
        if (w <= 0 || h <= 0) {
            throw UsageError("DepthMap: dimensions must be positive, got " +
                             std::to_string(w) + "x" + std::to_string(h));
        }
        return w * h;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

} // namespace graspkit
