#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"

// Binary PPM (P6, maxval 255). Byte b decodes to b/255; encoding quantizes
// with round(v*255) clamped to [0,255], so save/load round-trips are
// byte-identical for images whose values already lie on the 8-bit grid.
namespace graspkit::io {

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

// Cursor over a PNM header. Tracks the byte offset for error messages and
// skips '#' comments between tokens.
struct PnmCursor {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;
    std::string file;

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(file + ": " + what + " (offset " + std::to_string(pos) + ")");
    }

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            const std::uint8_t c = bytes[pos];
            if (std::isspace(c)) {
                ++pos;
            } else if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    std::string token() {
        skip_space_and_comments();
        if (pos >= bytes.size()) fail("unexpected end of header");
        std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
        return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                           bytes.begin() + static_cast<std::ptrdiff_t>(pos));
    }

    int positive_int(const char* name) {
        const std::size_t at = pos;
        std::string t = token();
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || v <= 0) {
            pos = at;
            fail(std::string("invalid ") + name + " \"" + t + "\"");
        }
        return v;
    }
};

} // namespace detail

inline void save_image(const Image& img, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    std::string header = "P6\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n255\n";
    bytes.reserve(header.size() + img.pixels().size());
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (float v : img.pixels()) {
        const float q = std::round(clamp01(v) * 255.0f);
        bytes.push_back(static_cast<std::uint8_t>(q));
    }
    detail::write_file_bytes(path, bytes);
}

inline Image load_image(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
    detail::PnmCursor cur{bytes, 0, path.string()};

    const std::string magic = cur.token();
    if (magic != "P6") {
        cur.pos = 0;
        cur.fail("expected magic \"P6\", got \"" + magic + "\"");
    }
    const int w = cur.positive_int("width");
    const int h = cur.positive_int("height");
    const std::size_t maxval_at = cur.pos;
    const int maxval = cur.positive_int("maxval");
    if (maxval != 255) {
        cur.pos = maxval_at;
        cur.fail("unsupported maxval " + std::to_string(maxval) + ", expected 255");
    }
    // Exactly one whitespace byte separates the header from the payload.
    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) {
        cur.fail("missing whitespace before pixel data");
    }
    ++cur.pos;

    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    const std::size_t have = bytes.size() - cur.pos;
    if (have < need) {
        throw FormatError(path.string() + ": truncated payload, need " +
                          std::to_string(need) + " bytes, have " + std::to_string(have) +
                          " (offset " + std::to_string(cur.pos) + ")");
    }

    std::vector<float> pixels(need);
    for (std::size_t i = 0; i < need; ++i) {
        pixels[i] = static_cast<float>(bytes[cur.pos + i]) / 255.0f;
    }
    return Image(w, h, std::move(pixels));
}

} // namespace graspkit::io
