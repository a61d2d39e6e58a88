#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "snse/errors.hpp"

namespace snse {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on [0,2pi)^dim, dim in {2,3}, n points per axis.
// Fourier modes are integer wavevectors; the retained band after truncation is
// |n_i| <= n/2 - 1 (the Nyquist plane is always zero so every retained mode
// has its conjugate partner in band).
struct Grid {
    int dim = 2;
    int n = 0;  // points per axis, even, >= 8

    std::int64_t points() const {
        std::int64_t p = 1;
        for (int i = 0; i < dim; ++i) p *= n;
        return p;
    }
    int max_mode() const { return n / 2 - 1; }
    // 2/3-rule band: quadratic products of fields supported here are alias-free
    // on the n-point grid.
    int dealias_mode() const { return (n - 1) / 3; }
    double volume() const { return std::pow(kTwoPi, dim); }
    double cell_volume() const { return std::pow(kTwoPi / n, dim); }

    bool operator==(const Grid&) const = default;
};

inline Grid make_grid(int dim, int n_per_axis) {
    if (dim != 2 && dim != 3)
        throw ConfigError("grid.dim must be 2 or 3, got " + std::to_string(dim));
    if (n_per_axis < 8 || n_per_axis % 2 != 0)
        throw ConfigError("grid.n_per_axis must be even and >= 8, got " +
                          std::to_string(n_per_axis));
    return Grid{dim, n_per_axis};
}

// Signed frequency of axis index i in [0,n): 0,1,...,n/2-1,-n/2,...,-1.
inline int axis_freq(int i, int n) { return i < n / 2 ? i : i - n; }
// Axis index of signed frequency f in [-n/2, n/2).
inline int axis_index(int f, int n) { return f >= 0 ? f : f + n; }

// Row-major flat index <-> wavevector. For dim==2 the third entry is 0.
inline std::int64_t flat_index(const Grid& g, const std::array<int, 3>& freq) {
    std::int64_t idx = 0;
    for (int a = 0; a < g.dim; ++a) idx = idx * g.n + axis_index(freq[a], g.n);
    return idx;
}

inline std::array<int, 3> wavevector(const Grid& g, std::int64_t flat) {
    std::array<int, 3> f{0, 0, 0};
    for (int a = g.dim - 1; a >= 0; --a) {
        f[a] = axis_freq(static_cast<int>(flat % g.n), g.n);
        flat /= g.n;
    }
    return f;
}

inline double wavevector_sq(const std::array<int, 3>& f) {
    return double(f[0]) * f[0] + double(f[1]) * f[1] + double(f[2]) * f[2];
}

}  // namespace snse
