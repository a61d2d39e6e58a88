#include "snse/norms.hpp"

#include <cmath>
#include <limits>

#include "snse/operators.hpp"

namespace snse {

namespace {

// Pointwise Euclidean magnitude samples on the `os`-oversampled grid.
void magnitude_sq_samples(Workspace& ws, const SpectralField& f, int os,
                          std::vector<double>& out) {
    const Grid& g = f.grid;
    std::int64_t npts = 1;
    for (int a = 0; a < g.dim; ++a) npts *= static_cast<std::int64_t>(os) * g.n;
    out.assign(static_cast<std::size_t>(npts), 0.0);
    std::vector<double> comp(static_cast<std::size_t>(npts));
    for (int c = 0; c < f.ncomp; ++c) {
        ws.to_physical(f.component(c), os, comp);
        for (std::int64_t i = 0; i < npts; ++i) out[i] += comp[i] * comp[i];
    }
}

double quadrature_lp(const Grid& g, int os, const std::vector<double>& mag_sq, double p) {
    const double cell = std::pow(kTwoPi / (os * g.n), g.dim);
    double s = 0.0;
    for (double m2 : mag_sq) s += std::pow(m2, 0.5 * p);
    return std::pow(cell * s, 1.0 / p);
}

}  // namespace

double lebesgue_norm(Workspace& ws, const SpectralField& f, double p) {
    if (p == 2.0) {
        double s = 0.0;
        for (const auto& c : f.coeffs) s += std::norm(c);
        return std::sqrt(f.grid.volume() * s);
    }
    std::vector<double> mag_sq;
    magnitude_sq_samples(ws, f, 2, mag_sq);
    return quadrature_lp(f.grid, 2, mag_sq, p);
}

double sobolev_norm(Workspace& ws, const SpectralField& f, double alpha, double p) {
    if (p == 2.0) return std::sqrt(sobolev_sq_l2(f, alpha));
    SpectralField b = f;
    apply_multiplier(b, [alpha](double k2) { return std::pow(1.0 + k2, 0.5 * alpha); });
    return lebesgue_norm(ws, b, p);
}

double sobolev_sq_l2(const SpectralField& f, double alpha) {
    const Grid& g = f.grid;
    double s = 0.0;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        const double w = std::pow(1.0 + wavevector_sq(wavevector(g, m)), alpha);
        for (int c = 0; c < f.ncomp; ++c) s += w * std::norm(f.at(c, m));
    }
    return g.volume() * s;
}

double hs_norm(Workspace& ws, std::span<const SpectralField> cols, double p) {
    if (cols.empty()) return 0.0;
    const Grid& g = cols[0].grid;
    std::int64_t npts = 1;
    for (int a = 0; a < g.dim; ++a) npts *= 2 * static_cast<std::int64_t>(g.n);
    std::vector<double> sum_sq(static_cast<std::size_t>(npts), 0.0);
    std::vector<double> comp(static_cast<std::size_t>(npts));
    for (const auto& col : cols) {
        for (int c = 0; c < col.ncomp; ++c) {
            ws.to_physical(col.component(c), 2, comp);
            for (std::int64_t i = 0; i < npts; ++i) sum_sq[i] += comp[i] * comp[i];
        }
    }
    return quadrature_lp(g, 2, sum_sq, p);
}

namespace {

// Spectrum of |f_c|^{p/2} sampled on the 2x grid, for one component.
// Shared by the two dissipation evaluation paths.
void component_power_spectrum(Workspace& ws, const SpectralField& f, int c, double p,
                              std::vector<cplx>& spectrum, std::vector<double>& samples) {
    const Grid& g = f.grid;
    std::int64_t npts = 1;
    for (int a = 0; a < g.dim; ++a) npts *= 2 * static_cast<std::int64_t>(g.n);
    samples.resize(static_cast<std::size_t>(npts));
    ws.to_physical(f.component(c), 2, samples);
    for (auto& x : samples) x = std::pow(std::abs(x), 0.5 * p);
    spectrum.resize(static_cast<std::size_t>(npts));
    ws.to_spectrum(samples, 2, spectrum);
}

}  // namespace

double dissipation_functional(Workspace& ws, const SpectralField& f, double p) {
    const Grid& g = f.grid;
    const Grid big{g.dim, 2 * g.n};
    std::vector<cplx> spec;
    std::vector<double> samples;
    double total = 0.0;
    for (int c = 0; c < f.ncomp; ++c) {
        component_power_spectrum(ws, f, c, p, spec, samples);
        double e = 0.0;
        for (std::int64_t m = 0; m < big.points(); ++m) {
            if (on_nyquist(big, m)) continue;  // both paths drop the ambiguous plane
            e += wavevector_sq(wavevector(big, m)) * std::norm(spec[m]);
        }
        total += big.volume() * e;
    }
    return total;
}

double dissipation_functional_quadrature(Workspace& ws, const SpectralField& f, double p) {
    const Grid& g = f.grid;
    const Grid big{g.dim, 2 * g.n};
    const std::int64_t npts = big.points();
    const double cell = std::pow(kTwoPi / big.n, big.dim);
    std::vector<cplx> spec, der(static_cast<std::size_t>(npts));
    std::vector<double> samples, dphys(static_cast<std::size_t>(npts));
    double total = 0.0;
    for (int c = 0; c < f.ncomp; ++c) {
        component_power_spectrum(ws, f, c, p, spec, samples);
        for (int a = 0; a < big.dim; ++a) {
            for (std::int64_t m = 0; m < npts; ++m) {
                if (on_nyquist(big, m)) {
                    der[m] = {0.0, 0.0};
                } else {
                    der[m] = spec[m] * cplx{0.0, double(wavevector(big, m)[a])};
                }
            }
            ws.spectrum_to_physical(der, 2, dphys);
            double s = 0.0;
            for (std::int64_t i = 0; i < npts; ++i) s += dphys[i] * dphys[i];
            total += cell * s;
        }
    }
    return total;
}

void partial_bundle(Workspace& ws, const SpectralField& f, bool want_lp, bool want_dissip,
                    NormBundle& b) {
    const Grid& g = f.grid;
    b = NormBundle{};
    double s_h05 = 0.0, s_h1 = 0.0, s_h32 = 0.0, s_h2 = 0.0;
    for (std::int64_t m = 0; m < g.points(); ++m) {
        const double k2 = wavevector_sq(wavevector(g, m));
        double amp = 0.0;
        for (int c = 0; c < f.ncomp; ++c) amp += std::norm(f.at(c, m));
        s_h05 += std::sqrt(1.0 + k2) * amp;
        s_h1 += (1.0 + k2) * amp;
        s_h32 += std::pow(1.0 + k2, 1.5) * amp;
        s_h2 += (1.0 + k2) * (1.0 + k2) * amp;
    }
    b.h05 = std::sqrt(g.volume() * s_h05);
    b.h1 = std::sqrt(g.volume() * s_h1);
    b.h32_sq = g.volume() * s_h32;
    b.h2_sq = g.volume() * s_h2;
    if (!want_lp && !want_dissip) return;

    // physical samples per component on the 2x grid, shared by L^p and the
    // dissipation rates
    const Grid big{g.dim, 2 * g.n};
    const std::int64_t npts = big.points();
    const double cell = std::pow(kTwoPi / big.n, big.dim);
    std::vector<double> comp(static_cast<std::size_t>(npts));
    std::vector<double> mag_sq(static_cast<std::size_t>(npts), 0.0);
    std::vector<double> pw(static_cast<std::size_t>(npts));
    std::vector<cplx> spec(static_cast<std::size_t>(npts));
    for (int c = 0; c < f.ncomp; ++c) {
        ws.to_physical(f.component(c), 2, comp);
        if (want_lp)
            for (std::int64_t i = 0; i < npts; ++i) mag_sq[i] += comp[i] * comp[i];
        if (!want_dissip) continue;
        for (double p : {3.0, 6.0}) {
            for (std::int64_t i = 0; i < npts; ++i) pw[i] = std::pow(std::abs(comp[i]), 0.5 * p);
            ws.to_spectrum(pw, 2, spec);
            double e = 0.0;
            for (std::int64_t m = 0; m < npts; ++m) {
                if (on_nyquist(big, m)) continue;
                e += wavevector_sq(wavevector(big, m)) * std::norm(spec[m]);
            }
            (p == 3.0 ? b.d3 : b.d6) += big.volume() * e;
        }
    }
    if (want_lp) {
        double q3 = 0.0, q6 = 0.0;
        for (std::int64_t i = 0; i < npts; ++i) {
            const double m3 = std::pow(mag_sq[i], 1.5);
            q3 += m3;
            q6 += m3 * m3;
        }
        b.l3 = std::pow(cell * q3, 1.0 / 3.0);
        b.l6 = std::pow(cell * q6, 1.0 / 6.0);
    }
}

NormBundle norm_bundle(Workspace& ws, const SpectralField& f) {
    NormBundle b;
    partial_bundle(ws, f, true, true, b);
    return b;
}

double poincare_ratio(Workspace& ws, const SpectralField& f, double p) {
    const double d = dissipation_functional(ws, f, p);
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(lebesgue_norm(ws, f, 3.0 * p), p) / d;
}

double l2_pairing(const SpectralField& f, const SpectralField& g) { return l2_inner(f, g); }

}  // namespace snse
