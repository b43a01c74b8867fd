#pragma once

#include <cmath>

#include "editext/matrix.hpp"

namespace editext {

// Fixed sinusoidal position table, one row per position.
inline Matrix sinusoid_table(int rows, int dim) {
    Matrix p(rows, dim);
    for (int pos = 0; pos < rows; ++pos) {
        for (int k = 0; k < dim; k += 2) {
            double freq = std::exp(-std::log(10000.0) * k / dim);
            p(pos, k) = std::sin(pos * freq);
            if (k + 1 < dim) p(pos, k + 1) = std::cos(pos * freq);
        }
    }
    return p;
}

// Sinusoidal features of a scalar timestep, shape 1 x dim.
inline Matrix time_features(int t, int dim) {
    Matrix f(1, dim);
    for (int k = 0; k < dim; k += 2) {
        double freq = std::exp(-std::log(10000.0) * k / dim);
        f(0, k) = std::sin(t * freq);
        if (k + 1 < dim) f(0, k + 1) = std::cos(t * freq);
    }
    return f;
}

}  // namespace editext
