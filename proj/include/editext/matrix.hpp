#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "editext/errors.hpp"
#include "editext/rng.hpp"

namespace editext {

// Dense row-major matrix of doubles. All model state that flows through the
// diffusion machinery (latents, noise draws, activations) uses this type.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return v.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    static Matrix standard_normal(int r, int c, RngStream& rng) {
        Matrix m(r, c);
        for (double& x : m.v) x = rng.normal();
        return m;
    }
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) throw input_error(std::string(what) + ": shape mismatch");
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw input_error("matmul: inner dimension mismatch");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = &a.v[static_cast<size_t>(i) * a.cols];
        double* ci = &c.v[static_cast<size_t>(i) * c.cols];
        for (int k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            const double* bk = &b.v[static_cast<size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.v[i] += b.v[i];
    return c;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.v[i] -= b.v[i];
    return c;
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (double& x : c.v) x *= s;
    return c;
}

// c = a + s*b
inline Matrix add_scaled(const Matrix& a, const Matrix& b, double s) {
    require_same_shape(a, b, "add_scaled");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.v[i] += s * b.v[i];
    return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.v[i] *= b.v[i];
    return c;
}

inline double frob_sq(const Matrix& a) {
    double s = 0.0;
    for (double x : a.v) s += x * x;
    return s;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::fabs(x));
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

}  // namespace editext
