#pragma once

#include <cmath>
#include <cstdint>

#include "snse/field.hpp"
#include "snse/grid.hpp"
#include "snse/rng.hpp"

namespace snse::test {

// Random real band-limited field, mean-zero and Nyquist-free but *not*
// divergence-free: the raw material for projector and transform tests.
inline SpectralField random_band_field(const Grid& g, int ncomp, std::uint64_t seed,
                                       double amp = 1.0) {
    SpectralField f(g, ncomp);
    for (int c = 0; c < ncomp; ++c) {
        for (std::int64_t m = 0; m < f.modes(); ++m) {
            double re, im;
            gaussian_pair(seed, static_cast<std::uint64_t>(c) * f.modes() + m, 17, re, im);
            f.at(c, m) = amp * cplx{re, im};
        }
    }
    hermitian_symmetrize(f);
    enforce_band(f);
    return f;
}

inline double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
    return m;
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Midpoint rule on [0, 2pi] with enough points that smooth 1d integrands are
// converged far below the tolerances in use; independent of the library's
// quadrature machinery.
template <class F>
double integral_1d(F&& f, int n = 400000) {
    const double h = kTwoPi / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f((i + 0.5) * h);
    return s * h;
}

}  // namespace snse::test
