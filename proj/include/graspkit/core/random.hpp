#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "graspkit/core/error.hpp"

namespace graspkit {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Pure 64-bit integer
// arithmetic, so the stream is bit-identical on every conforming platform.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace detail

// Deterministic splittable random stream.
//
// A stream is keyed by (seed, path) where path is the ordered list of fork
// labels from the root. The generator is counter-based SplitMix64:
//
//   output(n) = mix(key + n * 0x9E3779B97F4A7C15)
//
// with key derived from the seed and the label path. The uniform integer
// stream is bit-exact across platforms; real-valued draws use only IEEE
// multiplies plus sqrt/log/cos from libm (Box-Muller), which are
// deterministic within a process and stable across common libms.
//
// Forking reads only the key, never the counter, so a child's sequence does
// not depend on how many draws the parent has made. A single stream must not
// be drawn from concurrently; fork one stream per worker instead.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed)
        : seed_(seed), key_(detail::splitmix64_mix(seed ^ 0x5851F42D4C957F2DULL)) {}

    RandomStream fork(std::string_view label) const {
        if (label.empty()) {
            throw UsageError("RandomStream::fork: label must be non-empty");
        }
        RandomStream child = *this;
        child.key_ = detail::splitmix64_mix(key_ ^ detail::fnv1a64(label));
        child.counter_ = 0;
        child.path_.emplace_back(label);
        return child;
    }

    std::uint64_t next_u64() {
        ++counter_;
        return detail::splitmix64_mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform double in [0, 1), 53 significand bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Multiply-shift bounding, no modulo bias
    // beyond 2^-64.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) {
            throw UsageError("RandomStream::next_below: n must be positive");
        }
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via basic Box-Muller; consumes exactly two uniforms.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::string>& path() const { return path_; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::vector<std::string> path_;
};

} // namespace graspkit
