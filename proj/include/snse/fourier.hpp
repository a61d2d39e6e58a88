#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "snse/field.hpp"
#include "snse/grid.hpp"

namespace snse {

// FFT workspace bound to one grid. Owns fftw plans for the base grid and for
// integer-oversampled copies (oversample=2 is used by the L^p quadrature and
// dissipation paths). Not thread safe: one Workspace per worker thread; fftw
// planning itself is serialized internally behind a global mutex.
//
// Conventions: u(x) = sum_n uhat(n) exp(i n.x). The forward transform divides
// by the point count so round trips are exact to roundoff, and Plancherel
// reads  int |u|^2 = (2pi)^d sum_n |uhat(n)|^2.
class Workspace {
public:
    explicit Workspace(const Grid& g);
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    const Grid& grid() const { return grid_; }

    // Inverse transform of one component onto the (oversample*n)^dim grid.
    // Input coefficients live on the base grid band; they are zero-embedded
    // into the larger spectrum. Output is the real part (imaginary residue of
    // a symmetric field is roundoff and is dropped).
    void to_physical(std::span<const cplx> coeffs, int oversample, std::span<double> out);

    // Forward transform of real samples on the (oversample*n)^dim grid into
    // the full spectrum of that grid (oversampled band). `spectrum` has
    // (oversample*n)^dim entries, flat-indexed on the oversampled grid.
    void to_spectrum(std::span<const double> phys, int oversample, std::span<cplx> spectrum);

    // Forward transform of real samples on the base grid, truncated to the
    // retained band (Nyquist zeroed, mean kept as computed).
    void to_coeffs(std::span<const double> phys, std::span<cplx> coeffs);

    // Inverse of to_spectrum: a full (oversample*n)^dim spectrum back to real
    // samples on the same grid. No embedding, no truncation.
    void spectrum_to_physical(std::span<const cplx> spectrum, int oversample,
                              std::span<double> out);

    // Scratch vectors sized for the base grid (borrowed, reused across calls).
    std::vector<double>& scratch_real(int which);

private:
    struct Plans;
    Plans& plans_for(int oversample);

    Grid grid_;
    std::map<int, std::unique_ptr<Plans>> plans_;
    std::vector<std::vector<double>> scratch_;
};

}  // namespace snse
