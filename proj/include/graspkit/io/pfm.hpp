#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/io/ppm.hpp"

// Grayscale PFM ("Pf"). Scale header is written as -1.0 (little-endian);
// rows are stored bottom-up per the PFM convention. Floats are moved as raw
// 32-bit patterns, so NaN payloads survive a round-trip bit-exactly.
namespace graspkit::io {

namespace detail {

inline void put_f32_le(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xFF));
}

inline float get_f32_le(const std::uint8_t* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

inline float get_f32_be(const std::uint8_t* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[3]) |
                            (static_cast<std::uint32_t>(p[2]) << 8) |
                            (static_cast<std::uint32_t>(p[1]) << 16) |
                            (static_cast<std::uint32_t>(p[0]) << 24);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

} // namespace detail

inline void save_depth(const DepthMap& map, const std::filesystem::path& path) {
    if (!map.valid()) {
        throw UsageError("save_depth: map violates positivity/finiteness invariants");
    }
    std::vector<std::uint8_t> bytes;
    const std::string header = "Pf\n" + std::to_string(map.width()) + " " +
                               std::to_string(map.height()) + "\n-1.0\n";
    bytes.reserve(header.size() + static_cast<std::size_t>(map.width()) * map.height() * 4);
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (int y = map.height() - 1; y >= 0; --y) {
        for (int x = 0; x < map.width(); ++x) {
            detail::put_f32_le(bytes, map.at(x, y));
        }
    }
    detail::write_file_bytes(path, bytes);
}

inline DepthMap load_depth(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
    detail::PnmCursor cur{bytes, 0, path.string()};

    const std::string magic = cur.token();
    if (magic == "PF") {
        cur.pos = 0;
        cur.fail("color PFM (\"PF\") is not supported, expected grayscale \"Pf\"");
    }
    if (magic != "Pf") {
        cur.pos = 0;
        cur.fail("expected magic \"Pf\", got \"" + magic + "\"");
    }
    const int w = cur.positive_int("width");
    const int h = cur.positive_int("height");

    const std::size_t scale_at = cur.pos;
    const std::string scale_tok = cur.token();
    double scale = 0.0;
    std::size_t used = 0;
    try {
        scale = std::stod(scale_tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != scale_tok.size() || scale == 0.0 || !std::isfinite(scale)) {
        cur.pos = scale_at;
        cur.fail("invalid scale \"" + scale_tok + "\"");
    }
    const bool little_endian = scale < 0.0;

    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) {
        cur.fail("missing whitespace before pixel data");
    }
    ++cur.pos;

    const std::size_t count = static_cast<std::size_t>(w) * h;
    if (bytes.size() - cur.pos < count * 4) {
        throw FormatError(path.string() + ": truncated payload, need " +
                          std::to_string(count * 4) + " bytes, have " +
                          std::to_string(bytes.size() - cur.pos) + " (offset " +
                          std::to_string(cur.pos) + ")");
    }

    std::vector<float> values(count);
    for (int row = 0; row < h; ++row) {
        const int y = h - 1 - row; // file rows are bottom-up
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = bytes.data() + cur.pos +
                                    (static_cast<std::size_t>(row) * w + x) * 4;
            const float v = little_endian ? detail::get_f32_le(p) : detail::get_f32_be(p);
            if (!std::isnan(v)) {
                if (std::isinf(v)) {
                    throw FormatError(path.string() + ": non-finite depth value at pixel (" +
                                      std::to_string(x) + "," + std::to_string(y) + ")");
                }
                if (v <= 0.0f) {
                    throw FormatError(path.string() + ": non-positive depth value " +
                                      std::to_string(v) + " at pixel (" + std::to_string(x) +
                                      "," + std::to_string(y) + ")");
                }
            }
            values[static_cast<std::size_t>(y) * w + x] = v;
        }
    }
    return DepthMap(w, h, std::move(values));
}

} // namespace graspkit::io
