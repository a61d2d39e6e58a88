#pragma once

#include <functional>

#include "snse/field.hpp"
#include "snse/fourier.hpp"

namespace snse {

// Leray projection onto divergence-free fields:
//   g(n) = (I - n n^T / |n|^2) f(n),  g(0) = 0.
// Idempotent and self-adjoint; identity on already divergence-free fields.
void leray_project(SpectralField& f);
SpectralField leray_projected(const SpectralField& f);

// Multiply every coefficient by m(|n|^2). Used for heat factors, Bessel
// weights and similar radial multipliers.
void apply_multiplier(SpectralField& f, const std::function<double(double)>& m);

// Sharp Euclidean-shell filters: keep |n| <= r (low) or |n| > r (high).
void lowpass_shell(SpectralField& f, double r);
void highpass_shell(SpectralField& f, double r);

// Truncate to the 2/3 dealias band |n_i| <= dealias_mode per axis.
void dealias_truncate(SpectralField& f);

// Physical-space samples of a field and its gradient on the base grid,
// built from the dealiased part only. This is the shared input of every
// advection product; keeping it explicit lets the cascade reuse caches and
// form partial sums by pointwise addition (no extra transforms).
struct AdvectionCache {
    Grid grid;
    int ncomp = 0;
    // comp[i]: samples of u_i; grad[i][a]: samples of d_a u_i.
    std::vector<std::vector<double>> comp;
    std::vector<std::vector<double>> grad;  // ncomp*dim entries, index i*dim+a

    void add(const AdvectionCache& o, double s = 1.0);
    void set_zero();
};

void fill_advection_cache(Workspace& ws, const SpectralField& u, AdvectionCache& out);

// out = P( (a . grad) b ), dealiased. `a` supplies the transport velocity
// samples, `b` the gradient samples. Both caches must come from the same grid.
void advect(Workspace& ws, const AdvectionCache& a, const AdvectionCache& b, SpectralField& out);

// Convenience: caches built internally. out = P((a.grad) b).
void advect(Workspace& ws, const SpectralField& a, const SpectralField& b, SpectralField& out);

// Pointwise-accumulating variant used by the cascade assembly:
// phys_accum[i] -= s * sum_a a.comp[a] * b.grad[i*dim+a]   (i = 0..dim-1)
// followed later by finish_advect to transform, dealias and project.
void accumulate_advection(const AdvectionCache& a, const AdvectionCache& b, double s,
                          std::vector<std::vector<double>>& phys_accum);
void finish_advect(Workspace& ws, const std::vector<std::vector<double>>& phys_accum,
                   SpectralField& out);

// Full nonlinear drift of the monolithic equation: out = -P((u.grad) u).
void nonlinear_term(Workspace& ws, const SpectralField& u, SpectralField& out);

// Energy flux <P((u.grad)u), u>_{L^2}; vanishes to roundoff for dealiased
// divergence-free fields.
double energy_flux(Workspace& ws, const SpectralField& u);

}  // namespace snse
