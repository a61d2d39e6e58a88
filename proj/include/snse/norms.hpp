#pragma once

#include <span>

#include "snse/field.hpp"
#include "snse/fourier.hpp"

namespace snse {

// Lebesgue norm ||f||_{L^p} of a vector field (pointwise Euclidean magnitude).
// p = 2 uses Plancherel; other p use quadrature on the 2x oversampled grid,
// exact for the polynomial degrees that arise from band-limited fields at the
// integer p in use here.
double lebesgue_norm(Workspace& ws, const SpectralField& f, double p);

// Sobolev norm ||(1 - Delta)^{alpha/2} f||_{L^p} via the Bessel multiplier
// (1 + |n|^2)^{alpha/2}. alpha may be negative. p as in lebesgue_norm.
double sobolev_norm(Workspace& ws, const SpectralField& f, double alpha, double p);

// Squared H^alpha seminorm-free Plancherel form: (2pi)^d sum (1+|n|^2)^alpha |f(n)|^2.
double sobolev_sq_l2(const SpectralField& f, double alpha);

// Hilbert-Schmidt L^p norm of a column family {g_k}: the L^p norm of
// x -> (sum_k |g_k(x)|^2)^{1/2}. Columns must share grid and ncomp.
double hs_norm(Workspace& ws, std::span<const SpectralField> cols, double p);

// Dissipation functional  D_p(f) = sum_j int |grad(|f_j|^{p/2})|^2 dx.
// Component samples are taken on the 2x grid, |f_j|^{p/2} is transformed
// there, and the gradient energy is read off by Plancherel on the 2x band.
double dissipation_functional(Workspace& ws, const SpectralField& f, double p);

// As above but via physical-space quadrature of |grad s|^2 with the gradient
// of s = |f_j|^{p/2} computed spectrally on the 2x grid. Agrees with
// dissipation_functional to roundoff (same discrete object, Plancherel vs
// quadrature); kept as an independent evaluation path.
double dissipation_functional_quadrature(Workspace& ws, const SpectralField& f, double p);

// ||f||_{L^{3p}}^p / D_p(f), the ratio controlled by the interpolation
// inequality behind the energy estimates. Returns +inf if D_p(f) == 0.
double poincare_ratio(Workspace& ws, const SpectralField& f, double p);

// L^2 pairing (f,g) = (2pi)^d sum conj-symmetric Plancherel sum (real part).
double l2_pairing(const SpectralField& f, const SpectralField& g);

// Every tracked functional of one field in a single pass (the per-step ledger
// row). Shares physical samples between the L^p norms and the dissipation
// rates; values agree with the standalone functions to roundoff.
struct NormBundle {
    double l3 = 0.0, l6 = 0.0;
    double h05 = 0.0, h1 = 0.0;
    double d3 = 0.0, d6 = 0.0;      // instantaneous dissipation rates
    double h32_sq = 0.0, h2_sq = 0.0;
};
NormBundle norm_bundle(Workspace& ws, const SpectralField& f);

// Partial bundle: the Plancherel family always; the L^p pair and the
// dissipation rates only on request (they carry the transform cost). Skipped
// entries stay zero.
void partial_bundle(Workspace& ws, const SpectralField& f, bool want_lp, bool want_dissip,
                    NormBundle& out);

}  // namespace snse
