#pragma once

#include <complex>
#include <span>
#include <vector>

#include "snse/grid.hpp"

namespace snse {

using cplx = std::complex<double>;

// Truncated Fourier representation of a vector field on the torus.
// Storage is component-major: coeffs[c * grid.points() + flat_mode].
// Invariants for fields produced by this library:
//   - conjugate symmetry f(-n) = conj(f(n))  (field is real in physical space)
//   - zero mean: f(0) = 0
//   - Nyquist plane (any axis index n/2) identically zero
// Velocity fields additionally satisfy n . f(n) = 0 after Leray projection.
struct SpectralField {
    Grid grid;
    int ncomp = 0;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    SpectralField(const Grid& g, int ncomp)
        : grid(g), ncomp(ncomp), coeffs(static_cast<std::size_t>(ncomp) * g.points()) {}

    std::int64_t modes() const { return grid.points(); }

    cplx& at(int c, std::int64_t m) { return coeffs[static_cast<std::size_t>(c) * modes() + m]; }
    const cplx& at(int c, std::int64_t m) const {
        return coeffs[static_cast<std::size_t>(c) * modes() + m];
    }
    cplx& at(int c, const std::array<int, 3>& freq) { return at(c, flat_index(grid, freq)); }
    const cplx& at(int c, const std::array<int, 3>& freq) const {
        return at(c, flat_index(grid, freq));
    }

    std::span<cplx> component(int c) {
        return {coeffs.data() + static_cast<std::size_t>(c) * modes(),
                static_cast<std::size_t>(modes())};
    }
    std::span<const cplx> component(int c) const {
        return {coeffs.data() + static_cast<std::size_t>(c) * modes(),
                static_cast<std::size_t>(modes())};
    }

    void set_zero() { std::fill(coeffs.begin(), coeffs.end(), cplx{0.0, 0.0}); }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& c : coeffs) c *= a;
        return *this;
    }
};

inline SpectralField zero_field(const Grid& g, int ncomp) { return SpectralField(g, ncomp); }

// out += a * f
inline void add_scaled(SpectralField& out, const SpectralField& f, double a) {
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += a * f.coeffs[i];
}

// True if the axis-index tuple of `flat` touches any Nyquist plane.
inline bool on_nyquist(const Grid& g, std::int64_t flat) {
    for (int a = g.dim - 1; a >= 0; --a) {
        if (flat % g.n == g.n / 2) return true;
        flat /= g.n;
    }
    return false;
}

// Zero the mean mode and every Nyquist plane in place.
void enforce_band(SpectralField& f);

// max_n |f(-n) - conj(f(n))| over all components; 0 for a real field.
double hermitian_asymmetry(const SpectralField& f);

// Make the field exactly conjugate-symmetric by averaging paired modes.
void hermitian_symmetrize(SpectralField& f);

// max_n |n . f(n)| / max(1, max_n |f(n)|): relative divergence in coefficients.
double max_divergence_rel(const SpectralField& f);

// max_n |f(n)| over all components.
double max_coeff_abs(const SpectralField& f);

double l2_inner(const SpectralField& a, const SpectralField& b);  // (2pi)^d Plancherel pairing

}  // namespace snse
