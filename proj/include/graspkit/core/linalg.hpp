#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "graspkit/core/error.hpp"
#include "graspkit/core/random.hpp"

// Just enough dense double-precision linear algebra for the encoder and the
// denoiser: row-major matrices, matrix-vector products, outer-product
// accumulation. Sizes here are tiny; clarity beats blocking.
namespace graspkit::la {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    Vec v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {
        if (r <= 0 || c <= 0) {
            throw UsageError("Mat: dimensions must be positive");
        }
    }

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

inline void check_size(const Vec& x, std::size_t n, const char* what) {
    if (x.size() != n) {
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(x.size()));
    }
}

// y = M x
inline Vec matvec(const Mat& m, const Vec& x) {
    check_size(x, static_cast<std::size_t>(m.cols), "matvec input");
    Vec y(static_cast<std::size_t>(m.rows), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m.cols; ++c) acc += m.at(r, c) * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] = acc;
    }
    return y;
}

// y = M^T x
inline Vec matvec_t(const Mat& m, const Vec& x) {
    check_size(x, static_cast<std::size_t>(m.rows), "matvec_t input");
    Vec y(static_cast<std::size_t>(m.cols), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double xr = x[static_cast<std::size_t>(r)];
        for (int c = 0; c < m.cols; ++c) y[static_cast<std::size_t>(c)] += m.at(r, c) * xr;
    }
    return y;
}

// M += a b^T
inline void add_outer(Mat& m, const Vec& a, const Vec& b) {
    check_size(a, static_cast<std::size_t>(m.rows), "add_outer lhs");
    check_size(b, static_cast<std::size_t>(m.cols), "add_outer rhs");
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            m.at(r, c) += a[static_cast<std::size_t>(r)] * b[static_cast<std::size_t>(c)];
        }
    }
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
    check_size(y, x.size(), "axpy output");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
    check_size(b, a.size(), "dot operand");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void fill_uniform(Mat& m, double bound, RandomStream& rng) {
    for (double& x : m.v) x = rng.next_uniform(-bound, bound);
}

inline void fill_uniform(Vec& v, double bound, RandomStream& rng) {
    for (double& x : v) x = rng.next_uniform(-bound, bound);
}

} // namespace graspkit::la
