#pragma once

#include <cstdint>

#include "snse/field.hpp"
#include "snse/fourier.hpp"

namespace snse {

enum class SpectrumProfile {
    exp_decay,   // |uhat(n)| ~ amplitude * exp(-decay * |n|)
    white_band,  // flat up to band_radius
    power_law,   // |uhat(n)| ~ amplitude * (1+|n|^2)^{-decay/2}
};

struct RandomFieldParams {
    SpectrumProfile profile = SpectrumProfile::exp_decay;
    double amplitude = 1.0;
    double decay = 0.35;         // rate for exp_decay / exponent for power_law
    double band_radius = -1.0;   // <=0: full retained band
    double target_l3 = -1.0;     // >0: rescale so ||u||_{L^3} equals this
};

// Divergence-free, mean-zero, real random field with the given radial
// spectrum profile and independent complex Gaussian phases. Deterministic in
// (grid, seed, params); draws are keyed per mode so the result is identical
// across run orders and platforms.
SpectralField random_divfree_field(Workspace& ws, std::uint64_t seed,
                                   const RandomFieldParams& params);

// Classical Taylor-Green vortex on the 2-torus:
//   u = ( sin x cos y, -cos x sin y ),
// an exact Navier-Stokes solution decaying as exp(-2 nu t).
SpectralField taylor_green(const Grid& g);

// Single-mode divergence-free field  amp * (sin of one wavevector), used by
// oracle tests and noise audits.
SpectralField single_mode_field(const Grid& g, const std::array<int, 3>& freq, double amp);

}  // namespace snse
